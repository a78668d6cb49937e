//! Case files, batch runs, sweeps and the invariant suite behind the CLI.

mod config;
mod output;
mod run;

pub use config::{
    load_config, parse_config, MeshSpec, Outputs, RunConfig, SweepParameter, SweepSpec,
};
pub use output::{export_csv, export_profile, export_vtk, write_file, SweepRow, VtkFields, CSV_HEADER};
pub use run::{
    build_mesh, build_setup, evaluate_point, run_case, run_checks, run_sweep, tol, CaseOutcome,
    CaseSetup, CheckItem, CheckReport, HssSummary, PointResult, RunOptions, SweepOutcome,
};
