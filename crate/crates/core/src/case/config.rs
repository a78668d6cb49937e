//! TOML run configuration. Keys carry their unit as a suffix; everything is
//! converted to SI on parse.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mesh::{Diagonal, Point};
use crate::solver::{ml_min_to_m3s, ElementField, InletTreatment, Material, PhysicalParams, SolveOptions};
use crate::vasculature::{
    VascularCase, DEFAULT_SERPENTINE_MARGIN, DEFAULT_SERPENTINE_PASSES, DEFAULT_U_BOTTOM,
};

const MM: f64 = 1e-3;
const CELSIUS_OFFSET: f64 = 273.15;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: RawGeometry,
    #[serde(default)]
    mesh: RawMesh,
    material: RawMaterial,
    #[serde(default)]
    fluid: RawFluid,
    #[serde(default)]
    heating: RawHeating,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    layout: String,
    y_mm: Option<f64>,
    spacing_mm: Option<f64>,
    bottom_mm: Option<f64>,
    passes: Option<usize>,
    margin_mm: Option<f64>,
    waypoints_mm: Option<Vec<[f64; 2]>>,
    snap_tol_mm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    nx: Option<usize>,
    ny: Option<usize>,
    length_mm: Option<f64>,
    height_mm: Option<f64>,
    diagonal: Option<String>,
    file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    preset: Option<String>,
    #[serde(rename = "kappa_W_mK")]
    kappa_w_mk: Option<f64>,
    thickness_mm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFluid {
    rho_kg_m3: Option<f64>,
    #[serde(rename = "c_J_kgK")]
    c_j_kgk: Option<f64>,
    flow_rates_ml_min: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeating {
    #[serde(rename = "f0_W_m2")]
    f0_w_m2: Option<f64>,
    #[serde(rename = "h_T_W_m2K")]
    h_t_w_m2k: Option<f64>,
    #[serde(rename = "theta_amb_K")]
    theta_amb_k: Option<f64>,
    #[serde(rename = "theta_amb_C")]
    theta_amb_c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tolerance: Option<f64>,
    inlet: Option<String>,
    hss: Option<bool>,
    fd_check: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<bool>,
    vtk: Option<bool>,
    profile: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    values: Vec<f64>,
}

/// Where the plate triangulation comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Structured {
        length: f64,
        height: f64,
        nx: usize,
        ny: usize,
        diagonal: Diagonal,
    },
    /// A `vtmesh` file; relative paths are resolved against the config file.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    /// Values in mL/min.
    FlowRate,
    /// Values in W/m/K.
    Kappa,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    /// In the unit of the config file (mL/min or W/m/K).
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    pub csv: bool,
    pub vtk: bool,
    pub profile: bool,
}

/// A validated run configuration in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub geometry: VascularCase,
    pub mesh: MeshSpec,
    /// Material label for reports (preset name or "custom").
    pub material: String,
    /// Physical parameters with the first flow rate applied.
    pub params: PhysicalParams,
    /// Flow rates in mL/min, as written.
    pub flow_rates_ml_min: Vec<f64>,
    pub solve: SolveOptions,
    pub hss: bool,
    pub fd_check: bool,
    pub outputs: Outputs,
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    /// Parameters at flow rate `q_ml_min`.
    pub fn params_at_flow(&self, q_ml_min: f64) -> PhysicalParams {
        self.params.with_flow_rate(ml_min_to_m3s(q_ml_min))
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be non-negative, got {v}")))
    }
}

fn unused(key: &str, value: bool, layout: &str) -> Result<()> {
    if value {
        Err(Error::config(key, format!("not used by layout `{layout}`")))
    } else {
        Ok(())
    }
}

fn geometry(raw: &RawGeometry) -> Result<VascularCase> {
    let layout = raw.layout.as_str();
    let straight_keys = raw.y_mm.is_some();
    let u_keys = raw.spacing_mm.is_some() || raw.bottom_mm.is_some();
    let serp_keys = raw.passes.is_some() || raw.margin_mm.is_some();
    let poly_keys = raw.waypoints_mm.is_some() || raw.snap_tol_mm.is_some();
    match layout {
        "straight" => {
            unused("geometry.spacing_mm", u_keys, layout)?;
            unused("geometry.passes", serp_keys, layout)?;
            unused("geometry.waypoints_mm", poly_keys, layout)?;
            let y = raw.y_mm.map(|y| positive("geometry.y_mm", y)).transpose()?;
            Ok(VascularCase::Straight { y: y.map(|y| y * MM) })
        }
        "u_shape" => {
            unused("geometry.y_mm", straight_keys, layout)?;
            unused("geometry.passes", serp_keys, layout)?;
            unused("geometry.waypoints_mm", poly_keys, layout)?;
            let spacing = raw
                .spacing_mm
                .ok_or_else(|| Error::config("geometry.spacing_mm", "required for layout `u_shape`"))?;
            let spacing = positive("geometry.spacing_mm", spacing)? * MM;
            let bottom_y = match raw.bottom_mm {
                Some(b) => positive("geometry.bottom_mm", b)? * MM,
                None => DEFAULT_U_BOTTOM,
            };
            Ok(VascularCase::UShape { spacing, bottom_y })
        }
        "serpentine" => {
            unused("geometry.y_mm", straight_keys, layout)?;
            unused("geometry.spacing_mm", u_keys, layout)?;
            unused("geometry.waypoints_mm", poly_keys, layout)?;
            let passes = raw.passes.unwrap_or(DEFAULT_SERPENTINE_PASSES);
            if passes == 0 {
                return Err(Error::config("geometry.passes", "must be at least 1"));
            }
            let margin = match raw.margin_mm {
                Some(m) => positive("geometry.margin_mm", m)? * MM,
                None => DEFAULT_SERPENTINE_MARGIN,
            };
            Ok(VascularCase::Serpentine { passes, margin })
        }
        "polyline" => {
            unused("geometry.y_mm", straight_keys, layout)?;
            unused("geometry.spacing_mm", u_keys, layout)?;
            unused("geometry.passes", serp_keys, layout)?;
            let pts = raw.waypoints_mm.as_ref().ok_or_else(|| {
                Error::config("geometry.waypoints_mm", "required for layout `polyline`")
            })?;
            if pts.len() < 2 {
                return Err(Error::config("geometry.waypoints_mm", "needs at least two points"));
            }
            let waypoints: Vec<Point> = pts.iter().map(|p| [p[0] * MM, p[1] * MM]).collect();
            let snap_tol = non_negative("geometry.snap_tol_mm", raw.snap_tol_mm.unwrap_or(0.0))? * MM;
            Ok(VascularCase::Polyline { waypoints, snap_tol })
        }
        other => Err(Error::config(
            "geometry.layout",
            format!("unknown layout `{other}` (expected straight, u_shape, serpentine or polyline)"),
        )),
    }
}

fn mesh(raw: &RawMesh) -> Result<MeshSpec> {
    if let Some(file) = &raw.file {
        let extra = raw.nx.is_some()
            || raw.ny.is_some()
            || raw.length_mm.is_some()
            || raw.height_mm.is_some()
            || raw.diagonal.is_some();
        if extra {
            return Err(Error::config("mesh.file", "cannot be combined with structured-mesh keys"));
        }
        return Ok(MeshSpec::File(file.clone()));
    }
    let count = |key: &str, v: Option<usize>| match v {
        Some(0) => Err(Error::config(key, "must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(100),
    };
    let diagonal = match &raw.diagonal {
        Some(d) => d.parse().map_err(|e: String| Error::config("mesh.diagonal", e))?,
        None => Diagonal::Alternating,
    };
    Ok(MeshSpec::Structured {
        length: positive("mesh.length_mm", raw.length_mm.unwrap_or(100.0))? * MM,
        height: positive("mesh.height_mm", raw.height_mm.unwrap_or(100.0))? * MM,
        nx: count("mesh.nx", raw.nx)?,
        ny: count("mesh.ny", raw.ny)?,
        diagonal,
    })
}

fn strictly_increasing(key: &str, values: &[f64]) -> Result<()> {
    if let Some(w) = values.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::config(
            key,
            format!("values must be strictly increasing ({} then {})", w[0], w[1]),
        ));
    }
    Ok(())
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.to_string()))?;

    let geometry = geometry(&raw.geometry)?;
    let mesh = mesh(&raw.mesh)?;

    let (material, kappa) = match (&raw.material.preset, raw.material.kappa_w_mk) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "material.kappa_W_mK",
                "give either `preset` or `kappa_W_mK`, not both",
            ))
        }
        (Some(p), None) => {
            let m: Material = p
                .parse()
                .map_err(|e: Error| Error::config("material.preset", e.to_string()))?;
            (m.to_string(), m.conductivity())
        }
        (None, Some(k)) => ("custom".to_string(), positive("material.kappa_W_mK", k)?),
        (None, None) => {
            return Err(Error::config("material.preset", "missing (or give `kappa_W_mK`)"));
        }
    };
    let thickness = positive("material.thickness_mm", raw.material.thickness_mm.unwrap_or(5.0))? * MM;

    let flow_rates = raw.fluid.flow_rates_ml_min.unwrap_or_else(|| vec![1.0]);
    if flow_rates.is_empty() {
        return Err(Error::config("fluid.flow_rates_ml_min", "needs at least one value"));
    }
    for &q in &flow_rates {
        non_negative("fluid.flow_rates_ml_min", q)?;
    }

    let theta_amb = match (raw.heating.theta_amb_k, raw.heating.theta_amb_c) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "heating.theta_amb_C",
                "give either `theta_amb_K` or `theta_amb_C`, not both",
            ))
        }
        (Some(k), None) => positive("heating.theta_amb_K", k)?,
        (None, Some(c)) => positive("heating.theta_amb_C", c + CELSIUS_OFFSET)?,
        (None, None) => 295.15,
    };

    let params = PhysicalParams {
        kappa: ElementField::Uniform(kappa),
        thickness,
        h_t: positive("heating.h_T_W_m2K", raw.heating.h_t_w_m2k.unwrap_or(21.0))?,
        theta_amb,
        source: ElementField::Uniform(non_negative(
            "heating.f0_W_m2",
            raw.heating.f0_w_m2.unwrap_or(1000.0),
        )?),
        rho_f: positive("fluid.rho_kg_m3", raw.fluid.rho_kg_m3.unwrap_or(1000.0))?,
        c_f: positive("fluid.c_J_kgK", raw.fluid.c_j_kgk.unwrap_or(4183.0))?,
        flow_rate: ml_min_to_m3s(flow_rates[0]),
    };

    let tolerance = raw.solver.tolerance.unwrap_or(1e-10);
    if !(tolerance > 0.0 && tolerance < 1e-2) {
        return Err(Error::config("solver.tolerance", format!("must lie in (0, 1e-2), got {tolerance}")));
    }
    let inlet = match raw.solver.inlet.as_deref() {
        None | Some("flux") => InletTreatment::Flux,
        Some("row_replacement") => InletTreatment::RowReplacement,
        Some(other) => {
            return Err(Error::config(
                "solver.inlet",
                format!("unknown treatment `{other}` (expected flux or row_replacement)"),
            ))
        }
    };

    let sweep = match raw.sweep {
        None => None,
        Some(s) => {
            let parameter = match s.parameter.as_str() {
                "Q" | "flow_rate" => SweepParameter::FlowRate,
                "kappa" => SweepParameter::Kappa,
                other => {
                    return Err(Error::config(
                        "sweep.parameter",
                        format!("unknown parameter `{other}` (expected Q or kappa)"),
                    ))
                }
            };
            for &v in &s.values {
                match parameter {
                    SweepParameter::FlowRate => non_negative("sweep.values", v)?,
                    SweepParameter::Kappa => positive("sweep.values", v)?,
                };
            }
            strictly_increasing("sweep.values", &s.values)?;
            Some(SweepSpec {
                parameter,
                values: s.values,
            })
        }
    };

    Ok(RunConfig {
        geometry,
        mesh,
        material,
        params,
        flow_rates_ml_min: flow_rates,
        solve: SolveOptions {
            tolerance,
            inlet,
            ..SolveOptions::default()
        },
        hss: raw.solver.hss.unwrap_or(true),
        fd_check: raw.solver.fd_check.unwrap_or(false),
        outputs: Outputs {
            csv: raw.output.csv.unwrap_or(true),
            vtk: raw.output.vtk.unwrap_or(false),
            profile: raw.output.profile.unwrap_or(false),
        },
        sweep,
    })
}

/// Reads a configuration file; a relative `mesh.file` is taken relative to it.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = parse_config(&text)?;
    if let MeshSpec::File(file) = &config.mesh {
        if file.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            config.mesh = MeshSpec::File(base.join(file));
        }
    }
    Ok(config)
}
