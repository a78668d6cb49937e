//! Quantities of interest computed from solved fields: mean surface
//! temperature, thermal efficiency, and the global energy identities that tie
//! them together.

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::solver::{
    solve_direct_with, solve_reverse_with, FieldKind, PhysicalParams, SolveOptions, TemperatureField,
};
use crate::vasculature::VasculaturePath;

/// Area average of the P1 interpolant of `field`.
pub fn mean_surface_temperature(mesh: &TriMesh, field: &[f64]) -> Result<f64> {
    mesh.check_field(field, "temperature field")?;
    let integral: f64 = mesh.nodal_weights().iter().zip(field).map(|(w, t)| w * t).sum();
    Ok(integral / mesh.area())
}

/// Total heater power `∫ f dΩ`, in W.
pub fn total_power(mesh: &TriMesh, params: &PhysicalParams) -> f64 {
    mesh.element_areas()
        .iter()
        .enumerate()
        .map(|(e, a)| params.source.value(e) * a)
        .sum()
}

/// Mean temperature with no coolant flow, `ϑ_amb + ∫f / (h_T meas(Ω))`.
pub fn hss_mean(mesh: &TriMesh, params: &PhysicalParams) -> f64 {
    params.theta_amb + total_power(mesh, params) / (params.h_t * mesh.area())
}

/// Fraction of the heater power carried away by the coolant.
pub fn thermal_efficiency(
    params: &PhysicalParams,
    theta_outlet: f64,
    theta_inlet: f64,
    mesh: &TriMesh,
) -> Result<f64> {
    let power = total_power(mesh, params);
    if !(power > 0.0) {
        return Err(Error::ZeroPower);
    }
    Ok(params.heat_capacity_rate() * (theta_outlet - theta_inlet) / power)
}

/// Global diagnostics of one forward solve.
#[derive(Clone, Debug, PartialEq)]
pub struct QoiReport {
    pub mst: f64,
    pub theta_outlet: f64,
    /// The prescribed inlet temperature.
    pub theta_inlet: f64,
    /// Nodal value at the inlet; equals `theta_inlet` only as h → 0 under
    /// the flux inlet treatment.
    pub theta_inlet_node: f64,
    pub efficiency: f64,
    pub hss_mean: f64,
    /// `hss_mean - mst`.
    pub hss_gap: f64,
    /// `∫f − h_T ∫(ϑ−ϑ_amb) − χ(ϑ_out − ϑ_in)`, in W.
    pub energy_balance_residual: f64,
    /// Energy residual divided by `∫f`.
    pub energy_balance_relative: f64,
    /// Outlet rise minus its prediction from the mean temperature, in K.
    /// `None` when χ = 0, where the prediction divides by zero.
    pub outlet_rise_residual: Option<f64>,
    /// `hss_gap − χ (ϑ_out − ϑ_in) / (h_T meas(Ω))`, in K.
    pub hss_gap_residual: f64,
    /// `|MST_fwd − MST_rev|`, when a reverse solve was supplied.
    pub invariance_gap: Option<f64>,
    pub notices: Vec<String>,
}

fn check_kind(field: &TemperatureField, kind: FieldKind, what: &str) -> Result<()> {
    if field.kind != kind {
        return Err(Error::Mismatch(format!(
            "{what} must come from a {kind:?} solve, got {:?}",
            field.kind
        )));
    }
    Ok(())
}

/// Evaluates the energy identities on a forward solution.
pub fn equivalence_diagnostics(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    forward: &TemperatureField,
) -> Result<QoiReport> {
    check_kind(forward, FieldKind::Forward, "field")?;
    path.check_mesh(mesh)?;
    let t = &forward.values;
    let mst = mean_surface_temperature(mesh, t)?;
    let area = mesh.area();
    let power = total_power(mesh, params);
    let chi = forward.chi_used;
    let theta_outlet = t[path.outlet_node()];
    let theta_inlet = params.theta_amb;
    let rise = theta_outlet - theta_inlet;
    let hss = hss_mean(mesh, params);
    let hss_gap = hss - mst;

    let surface_loss = params.h_t * area * (mst - params.theta_amb);
    let energy_balance_residual = power - surface_loss - chi * rise;
    let mut notices = Vec::new();
    let outlet_rise_residual = if chi > 0.0 {
        Some(rise - (power - surface_loss) / chi)
    } else {
        notices.push("χ = 0: outlet-rise identity skipped".to_string());
        None
    };
    let efficiency = if power > 0.0 {
        chi * rise / power
    } else {
        notices.push("zero heater power: efficiency undefined, reported as 0".to_string());
        0.0
    };
    Ok(QoiReport {
        mst,
        theta_outlet,
        theta_inlet,
        theta_inlet_node: t[path.inlet_node()],
        efficiency,
        hss_mean: hss,
        hss_gap,
        energy_balance_residual,
        energy_balance_relative: if power > 0.0 {
            energy_balance_residual / power
        } else {
            energy_balance_residual
        },
        outlet_rise_residual,
        hss_gap_residual: hss_gap - chi * rise / (params.h_t * area),
        invariance_gap: None,
        notices,
    })
}

impl QoiReport {
    /// Records the flow-reversal gap against a reverse solution.
    pub fn with_reverse(mut self, mesh: &TriMesh, reverse: &TemperatureField) -> Result<Self> {
        check_kind(reverse, FieldKind::Reverse, "reverse field")?;
        let mst_rev = mean_surface_temperature(mesh, &reverse.values)?;
        self.invariance_gap = Some((self.mst - mst_rev).abs());
        Ok(self)
    }
}

/// `|MST_fwd − MST_rev|` for a uniformly heated plate.
pub fn invariance_check(mesh: &TriMesh, path: &VasculaturePath, params: &PhysicalParams) -> Result<f64> {
    invariance_check_with(mesh, path, params, &SolveOptions::default())
}

pub fn invariance_check_with(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    options: &SolveOptions,
) -> Result<f64> {
    if params.uniform_source().is_none() {
        return Err(Error::NonUniformSource(
            "flow-reversal invariance holds only for uniform heating".into(),
        ));
    }
    let (fwd, rev) = rayon::join(
        || solve_direct_with(mesh, path, params, options),
        || solve_reverse_with(mesh, path, params, options),
    );
    let a = mean_surface_temperature(mesh, &fwd?.values)?;
    let b = mean_surface_temperature(mesh, &rev?.values)?;
    Ok((a - b).abs())
}
