use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vtherm::case::{load_config, run_case, run_checks, run_sweep, CheckReport, RunOptions, CSV_HEADER};
use vtherm::mesh::load_mesh;
use vtherm::Error;

#[derive(Parser)]
#[command(name = "vtherm", version, about = "Steady thermal analysis of plates with an embedded cooling channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every configured flow rate and report temperatures and sensitivities.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also run the invariant suite and exit nonzero if any check fails.
        #[arg(long)]
        check: bool,
    },
    /// Run the parameter sweep from the config's [sweep] table.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite only.
    Check {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print a summary of a mesh file.
    MeshInfo { meshfile: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Directory for CSV, VTK and profile files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of concurrent solve workers.
    #[arg(long)]
    workers: Option<usize>,
    /// Write a VTK file per flow rate.
    #[arg(long)]
    vtk: bool,
    /// Write the temperature along the channel per flow rate.
    #[arg(long)]
    profile: bool,
}

impl From<Common> for RunOptions {
    fn from(c: Common) -> Self {
        RunOptions {
            out_dir: c.out_dir,
            workers: c.workers,
            vtk: c.vtk,
            profile: c.profile,
        }
    }
}

fn print_checks(report: &CheckReport) {
    for item in &report.items {
        let mark = if item.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {}: {}", item.name, item.detail);
    }
    let failed = report.items.iter().filter(|i| !i.passed).count();
    println!("{} checks, {failed} failed", report.items.len());
}

fn execute(command: Command) -> Result<bool, Error> {
    match command {
        Command::Run { config, common, check } => {
            let cfg = load_config(&config)?;
            let options = RunOptions::from(common);
            let outcome = run_case(&cfg, &options)?;
            println!(
                "{} nodes, {} elements, channel of {} nodes, material {}",
                outcome.setup.mesh.num_nodes(),
                outcome.setup.mesh.num_elements(),
                outcome.setup.path.len(),
                cfg.material
            );
            if let Some(hss) = &outcome.hss {
                println!("hot steady state mean {:.6} K", hss.mean);
            }
            println!("{CSV_HEADER}");
            for row in &outcome.rows {
                println!(
                    "{},{:.6},{:.6},{:.6},{:.6e},{:.6e},{:.3e},{:.3e}",
                    row.param,
                    row.mst,
                    row.theta_outlet,
                    row.efficiency,
                    row.dphi_chi,
                    row.dphi_kappa,
                    row.invariance_gap,
                    row.energy_residual
                );
            }
            for (q, point) in &outcome.points {
                for notice in &point.qoi.notices {
                    eprintln!("note [Q={q}]: {notice}");
                }
                if let (Some(ec), Some(ek)) = (point.sensitivity.rel_err_chi, point.sensitivity.rel_err_kappa) {
                    println!("fd check [Q={q}]: rel err χ {ec:.2e}, κ {ek:.2e}");
                }
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if check {
                let report = run_checks(&cfg, &RunOptions { out_dir: None, ..options })?;
                print_checks(&report);
                return Ok(report.passed());
            }
            Ok(true)
        }
        Command::Sweep { config, common } => {
            let cfg = load_config(&config)?;
            let outcome = run_sweep(&cfg, &RunOptions::from(common))?;
            print!("{}", vtherm::case::export_csv(&outcome.rows));
            for row in &outcome.rows {
                if let Some(e) = &row.error {
                    eprintln!("point {} failed: {e}", row.param);
                }
            }
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::Check { config, common } => {
            let cfg = load_config(&config)?;
            let report = run_checks(&cfg, &RunOptions::from(common))?;
            print_checks(&report);
            Ok(report.passed())
        }
        Command::MeshInfo { meshfile } => {
            let text = std::fs::read_to_string(&meshfile).map_err(|e| Error::Io {
                path: meshfile.clone(),
                source: e,
            })?;
            let mesh = load_mesh(&text)?;
            let ext = mesh.extent();
            let areas = mesh.element_areas();
            let (amin, amax) = areas
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            let boundary = mesh.boundary_nodes().iter().filter(|b| **b).count();
            println!("nodes          {}", mesh.num_nodes());
            println!("elements       {}", mesh.num_elements());
            println!("boundary nodes {boundary}");
            println!("boundary edges {}", mesh.boundary_edges().len());
            println!("extent         {} m x {} m", ext[0], ext[1]);
            println!("area           {:e} m^2", mesh.area());
            println!("element area   min {amin:e}, max {amax:e} m^2");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
