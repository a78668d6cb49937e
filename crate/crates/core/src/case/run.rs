use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{build_structured_mesh, load_mesh, TriMesh};
use crate::qoi::{equivalence_diagnostics, hss_mean, mean_surface_temperature, QoiReport};
use crate::sensitivity::{heat_flux, sensitivity_kappa, sensitivity_report, SensitivityReport};
use crate::solver::{
    assemble, solve_direct_with, solve_hss_with, solve_reverse_with, ElementField, FlowDirection,
    InletTreatment, PhysicalParams, SolveOptions, TemperatureField,
};
use crate::vasculature::{make_case, VasculaturePath};

use super::config::{MeshSpec, RunConfig, SweepParameter};
use super::output::{export_csv, export_profile, export_vtk, write_file, SweepRow, VtkFields};

/// Command-line overrides that are not part of the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Files are written only when this is set.
    pub out_dir: Option<PathBuf>,
    /// Thread count for concurrent points; `None` uses all cores.
    pub workers: Option<usize>,
    pub vtk: bool,
    pub profile: bool,
}

pub struct CaseSetup {
    pub mesh: TriMesh,
    pub path: VasculaturePath,
}

pub fn build_mesh(spec: &MeshSpec) -> Result<TriMesh> {
    match spec {
        MeshSpec::Structured {
            length,
            height,
            nx,
            ny,
            diagonal,
        } => build_structured_mesh(*length, *height, *nx, *ny, *diagonal),
        MeshSpec::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            load_mesh(&text)
        }
    }
}

pub fn build_setup(config: &RunConfig) -> Result<CaseSetup> {
    let mesh = build_mesh(&config.mesh)?;
    let path = make_case(&config.geometry, &mesh)?;
    Ok(CaseSetup { mesh, path })
}

/// Everything computed at one parameter point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub params: PhysicalParams,
    pub forward: TemperatureField,
    pub reverse: TemperatureField,
    pub qoi: QoiReport,
    pub sensitivity: SensitivityReport,
}

impl PointResult {
    pub fn row(&self, param: f64) -> SweepRow {
        SweepRow {
            param,
            mst: self.qoi.mst,
            theta_outlet: self.qoi.theta_outlet,
            efficiency: self.qoi.efficiency,
            dphi_chi: self.sensitivity.dphi_chi,
            dphi_kappa: self.sensitivity.dphi_kappa_uniform,
            invariance_gap: self.qoi.invariance_gap.unwrap_or(f64::NAN),
            energy_residual: self.qoi.energy_balance_residual,
            error: None,
        }
    }
}

/// Forward and reverse solves plus every derived quantity.
pub fn evaluate_point(
    setup: &CaseSetup,
    params: &PhysicalParams,
    options: &SolveOptions,
    with_fd: bool,
) -> Result<PointResult> {
    let (mesh, path) = (&setup.mesh, &setup.path);
    let forward = solve_direct_with(mesh, path, params, options)?;
    let reverse = solve_reverse_with(mesh, path, params, options)?;
    let qoi = equivalence_diagnostics(mesh, path, params, &forward)?.with_reverse(mesh, &reverse)?;
    let sensitivity = sensitivity_report(mesh, path, params, &forward, &reverse, with_fd, options)?;
    Ok(PointResult {
        params: params.clone(),
        forward,
        reverse,
        qoi,
        sensitivity,
    })
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Error::InvalidArgument("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Hot-steady-state summary.
#[derive(Clone, Debug, PartialEq)]
pub struct HssSummary {
    pub mean: f64,
    pub analytic_mean: f64,
    /// Largest nodal distance from the analytic value (uniform heating only).
    pub max_deviation: Option<f64>,
}

pub struct CaseOutcome {
    pub setup: CaseSetup,
    /// One entry per configured flow rate, in mL/min.
    pub points: Vec<(f64, PointResult)>,
    pub rows: Vec<SweepRow>,
    pub hss: Option<HssSummary>,
    pub files: Vec<PathBuf>,
}

fn file_tag(v: f64) -> String {
    format!("{v}").replace('.', "p")
}

/// Runs every configured flow rate and writes the requested outputs.
pub fn run_case(config: &RunConfig, options: &RunOptions) -> Result<CaseOutcome> {
    let setup = build_setup(config)?;
    let points: Vec<(f64, PointResult)> = with_pool(options.workers, || {
        config
            .flow_rates_ml_min
            .par_iter()
            .map(|&q| {
                let params = config.params_at_flow(q);
                evaluate_point(&setup, &params, &config.solve, config.fd_check).map(|r| (q, r))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let rows: Vec<SweepRow> = points.iter().map(|(q, r)| r.row(*q)).collect();

    let hss = if config.hss {
        let field = solve_hss_with(&setup.mesh, &config.params, &config.solve)?;
        let analytic_mean = hss_mean(&setup.mesh, &config.params);
        let max_deviation = config.params.uniform_source().map(|_| {
            field
                .values
                .iter()
                .map(|v| (v - analytic_mean).abs())
                .fold(0.0, f64::max)
        });
        Some(HssSummary {
            mean: mean_surface_temperature(&setup.mesh, &field.values)?,
            analytic_mean,
            max_deviation,
        })
    } else {
        None
    };

    let mut files = Vec::new();
    if let Some(dir) = &options.out_dir {
        ensure_dir(dir)?;
        if config.outputs.csv {
            let path = dir.join("results.csv");
            write_file(&path, &export_csv(&rows))?;
            files.push(path);
        }
        for (q, r) in &points {
            if config.outputs.vtk || options.vtk {
                let path = dir.join(format!("field_q{}.vtk", file_tag(*q)));
                write_file(&path, &field_vtk(&setup, r)?)?;
                files.push(path);
            }
            if config.outputs.profile || options.profile {
                let path = dir.join(format!("profile_q{}.csv", file_tag(*q)));
                write_file(&path, &export_profile(&setup.path, &r.forward.values, &r.reverse.values))?;
                files.push(path);
            }
        }
    }
    Ok(CaseOutcome {
        setup,
        points,
        rows,
        hss,
        files,
    })
}

fn field_vtk(setup: &CaseSetup, r: &PointResult) -> Result<String> {
    let qf = heat_flux(&setup.mesh, &r.params, &r.forward)?;
    let qr = heat_flux(&setup.mesh, &r.params, &r.reverse)?;
    let fields = VtkFields {
        point_scalars: vec![
            ("temperature_forward", &r.forward.values),
            ("temperature_reverse", &r.reverse.values),
        ],
        cell_scalars: vec![("kappa_sensitivity", &r.sensitivity.dphi_kappa_field)],
        cell_vectors: vec![("heat_flux_forward", &qf.values), ("heat_flux_reverse", &qr.values)],
    };
    export_vtk(&setup.mesh, "vascular plate temperature", &fields)
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub files: Vec<PathBuf>,
}

/// Runs one forward/reverse pair per sweep value. Failed points are kept as
/// marked rows; the sweep itself only fails on setup errors.
pub fn run_sweep(config: &RunConfig, options: &RunOptions) -> Result<SweepOutcome> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "the config has no [sweep] table"))?;
    let setup = build_setup(config)?;
    let rows: Vec<SweepRow> = with_pool(options.workers, || {
        sweep
            .values
            .par_iter()
            .map(|&v| {
                let params = match sweep.parameter {
                    SweepParameter::FlowRate => config.params_at_flow(v),
                    SweepParameter::Kappa => config.params.with_kappa(ElementField::Uniform(v)),
                };
                match evaluate_point(&setup, &params, &config.solve, false) {
                    Ok(r) => r.row(v),
                    Err(e) => SweepRow::failed(v, e.to_string()),
                }
            })
            .collect()
    })?;

    let mut files = Vec::new();
    if let Some(dir) = &options.out_dir {
        ensure_dir(dir)?;
        let path = dir.join("sweep.csv");
        write_file(&path, &export_csv(&rows))?;
        files.push(path);
    }
    Ok(SweepOutcome { rows, files })
}

/// Tolerances of the invariant suite.
pub mod tol {
    pub const ENERGY_RELATIVE: f64 = 1e-8;
    pub const HSS_GAP_K: f64 = 1e-8;
    pub const INVARIANCE_RELATIVE: f64 = 1e-3;
    pub const CHI_SIGN: f64 = 1e-9;
    pub const FD_RELATIVE: f64 = 1e-2;
    pub const BOUNDS_K: f64 = 1e-3;
    pub const HSS_NODAL_K: f64 = 1e-6;
    pub const REFINEMENT_K: f64 = 0.05;
    pub const TRANSPOSE_RELATIVE: f64 = 1e-14;
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.items.push(CheckItem {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

fn transpose_gap(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    let at = a.transpose();
    let mut sum = 0.0;
    for (i, j, v) in at.entries() {
        sum += (v - b.get(i, j)).powi(2);
    }
    for (i, j, v) in b.entries() {
        if at.get(i, j) == 0.0 {
            sum += v * v;
        }
    }
    sum.sqrt()
}

/// The invariant suite run by `check` and `--check`.
pub fn run_checks(config: &RunConfig, options: &RunOptions) -> Result<CheckReport> {
    let mut cfg = config.clone();
    cfg.fd_check = true;
    cfg.hss = true;
    let outcome = run_case(&cfg, options)?;
    let setup = &outcome.setup;
    let mesh = &setup.mesh;
    let uniform = config.params.uniform_source().is_some();
    let mut report = CheckReport::default();

    if let Some(hss) = &outcome.hss {
        if let Some(dev) = hss.max_deviation {
            report.push(
                "hss analytic",
                dev <= tol::HSS_NODAL_K,
                format!("max |ϑ − {:.6}| = {dev:.3e} K", hss.analytic_mean),
            );
        }
    }

    // Richardson-style error estimate per flow rate: the change in MST when
    // the structured mesh is refined once.
    let mut refinement: Vec<Option<f64>> = vec![None; outcome.points.len()];
    if let MeshSpec::Structured {
        length,
        height,
        nx,
        ny,
        diagonal,
    } = config.mesh
    {
        let fine = build_structured_mesh(length, height, 2 * nx, 2 * ny, diagonal)?;
        let fine_path = make_case(&config.geometry, &fine)?;
        for (k, (q, r)) in outcome.points.iter().enumerate() {
            let t = solve_direct_with(&fine, &fine_path, &r.params, &config.solve)?;
            let change = (mean_surface_temperature(&fine, &t.values)? - r.qoi.mst).abs();
            refinement[k] = Some(change);
            report.push(
                format!("mesh refinement [Q={q} mL/min]"),
                change < tol::REFINEMENT_K,
                format!("|MST({nx}x{ny}) − MST({}x{})| = {change:.4e} K", 2 * nx, 2 * ny),
            );
        }
    }

    for (k, (q, r)) in outcome.points.iter().enumerate() {
        let tag = |name: &str| format!("{name} [Q={q} mL/min]");
        let amb = r.params.theta_amb;

        if config.solve.inlet == InletTreatment::Flux {
            let f = assemble(mesh, &setup.path, &r.params, FlowDirection::Forward, InletTreatment::Flux)?;
            let b = assemble(mesh, &setup.path, &r.params, FlowDirection::Reverse, InletTreatment::Flux)?;
            let gap = transpose_gap(&f.matrix, &b.matrix) / f.matrix.frobenius_norm();
            report.push(
                tag("reverse operator is forward transpose"),
                gap <= tol::TRANSPOSE_RELATIVE,
                format!("relative gap {gap:.2e}"),
            );
        }

        let e = r.qoi.energy_balance_relative;
        report.push(tag("energy balance"), e.abs() <= tol::ENERGY_RELATIVE, format!("residual/∫f = {e:.2e}"));
        let g = r.qoi.hss_gap_residual;
        report.push(tag("hss gap identity"), g.abs() <= tol::HSS_GAP_K, format!("residual {g:.2e} K"));

        if uniform {
            // The discrete gap alone can be exact on any mesh, so the bound on
            // the resolved gap adds the discretization error of both MSTs.
            let rise = r.qoi.mst - amb;
            let gap = r.qoi.invariance_gap.unwrap_or(f64::NAN);
            let err = refinement[k].unwrap_or(0.0);
            let bound = gap + 2.0 * err;
            report.push(
                tag("flow-reversal invariance"),
                bound <= tol::INVARIANCE_RELATIVE * rise,
                format!(
                    "|ΔMST| = {gap:.3e} K, + 2 × refinement error = {bound:.3e} K vs {:.3e} K",
                    tol::INVARIANCE_RELATIVE * rise
                ),
            );
            let s = &r.sensitivity;
            report.push(
                tag("χ-sensitivity sign"),
                s.dphi_chi <= tol::CHI_SIGN,
                format!("DΦ[χ] = {:.4e}", s.dphi_chi),
            );
            let scale = 1e-12 * s.phi.abs();
            for (name, adj, fd, err) in [
                ("fd gradient χ", s.dphi_chi, s.fd_chi, s.rel_err_chi),
                ("fd gradient κ", s.dphi_kappa_uniform, s.fd_kappa_uniform, s.rel_err_kappa),
            ] {
                if let (Some(fd), Some(err)) = (fd, err) {
                    if fd.abs() > scale {
                        report.push(
                            tag(name),
                            err <= tol::FD_RELATIVE,
                            format!("adjoint {adj:.6e}, fd {fd:.6e}, rel err {err:.2e}"),
                        );
                    }
                }
            }
            let kappa = sensitivity_kappa(mesh, &r.forward, &r.reverse, &r.params)?;
            let consistent = kappa.uniform_total <= 0.0 || kappa.flux_alignment < 0.0;
            report.push(
                tag("opposing-flux sign"),
                consistent,
                format!(
                    "DΦ[κ] = {:.4e}, ∫(d/κ²)q_r·q_f = {:.4e}",
                    kappa.uniform_total, kappa.flux_alignment
                ),
            );
            let upper = r.qoi.hss_mean + tol::BOUNDS_K;
            let lower = amb - tol::BOUNDS_K;
            let (lo, hi) = r
                .forward
                .values
                .iter()
                .chain(&r.reverse.values)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            report.push(
                tag("temperature bounds"),
                lo >= lower && hi <= upper,
                format!("min {lo:.4} K, max {hi:.4} K, allowed [{lower:.4}, {upper:.4}]"),
            );
        }
    }

    Ok(report)
}
