//! Adjoint sensitivities of `Φ = ∫ ϑ dΩ` to the coolant heat-capacity rate
//! and to the host conductivity.
//!
//! The adjoint of the forward problem is the reverse-flow problem: with the
//! flux inlet treatment the reverse operator is exactly the transpose of the
//! forward one, so `(ϑ^(r) − ϑ_amb)/f₀` is the discrete adjoint state and the
//! expressions below are exact derivatives of the discrete objective.

use crate::error::{Error, Result};
use crate::mesh::{dot, gradient_unchecked, Point, TriMesh};
use crate::solver::{
    solve_direct_with, ElementField, FieldKind, PhysicalParams, SolveOptions, TemperatureField,
};
use crate::vasculature::VasculaturePath;

/// Per-element heat flux `q = −κ grad ϑ`, in W/m².
#[derive(Clone, Debug, PartialEq)]
pub struct HeatFluxField {
    pub values: Vec<Point>,
    pub kind: FieldKind,
}

pub fn heat_flux(mesh: &TriMesh, params: &PhysicalParams, field: &TemperatureField) -> Result<HeatFluxField> {
    mesh.check_field(&field.values, "temperature field")?;
    params.validate(Some(mesh.num_elements()))?;
    let values = (0..mesh.num_elements())
        .map(|e| {
            let g = gradient_unchecked(mesh, &field.values, e);
            let k = params.kappa.value(e);
            [-k * g[0], -k * g[1]]
        })
        .collect();
    Ok(HeatFluxField {
        values,
        kind: field.kind,
    })
}

fn uniform_f0(params: &PhysicalParams) -> Result<f64> {
    params.uniform_source().ok_or_else(|| {
        Error::NonUniformSource("adjoint sensitivities are defined for uniform heating only".into())
    })
}

fn check_pair(mesh: &TriMesh, forward: &TemperatureField, reverse: &TemperatureField) -> Result<()> {
    mesh.check_field(&forward.values, "forward field")?;
    mesh.check_field(&reverse.values, "reverse field")?;
    if forward.kind != FieldKind::Forward || reverse.kind != FieldKind::Reverse {
        return Err(Error::Mismatch(format!(
            "expected forward and reverse fields, got {:?} and {:?}",
            forward.kind, reverse.kind
        )));
    }
    if forward.chi_used != reverse.chi_used {
        return Err(Error::Mismatch(format!(
            "fields were solved at different χ ({} vs {})",
            forward.chi_used, reverse.chi_used
        )));
    }
    Ok(())
}

/// `DΦ[χ]`, in m²·K per W/K.
///
/// Per edge, the tangential derivative of `ϑ^(f)` is the exact difference
/// quotient and `ϑ^(r) − ϑ_amb` is averaged over the two end nodes. The final
/// term accounts for the inlet equation `χ(ϑ_in − ϑ_amb)`; it vanishes when
/// the inlet value is met exactly and is O(h) otherwise.
pub fn sensitivity_chi(
    mesh: &TriMesh,
    path: &VasculaturePath,
    forward: &TemperatureField,
    reverse: &TemperatureField,
    params: &PhysicalParams,
) -> Result<f64> {
    path.check_mesh(mesh)?;
    check_pair(mesh, forward, reverse)?;
    let f0 = uniform_f0(params)?;
    if f0 == 0.0 {
        return Ok(0.0);
    }
    let amb = params.theta_amb;
    let (tf, tr) = (&forward.values, &reverse.values);
    let mut line = 0.0;
    for (a, b) in path.edge_chain() {
        let adjoint_mid = 0.5 * ((tr[a] - amb) + (tr[b] - amb));
        line += (tf[b] - tf[a]) * adjoint_mid;
    }
    let inlet = path.inlet_node();
    let inlet_term = (tr[inlet] - amb) * (tf[inlet] - amb);
    Ok(-(line + inlet_term) / f0)
}

/// Conductivity sensitivity split by element.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaSensitivity {
    /// `−(d/f₀) area_e grad ϑ^(r)·grad ϑ^(f)` on each element.
    pub per_element: Vec<f64>,
    /// The same quantity from fluxes, `−(1/f₀)(d/κ²) area_e q^(r)·q^(f)`.
    pub per_element_flux_form: Vec<f64>,
    /// `∫ (d/κ²) q^(r)·q^(f) dΩ`, in W·m (positive when the fluxes align).
    pub flux_alignment: f64,
    /// Sensitivity to a uniform change of κ: `−flux_alignment / f₀`.
    pub uniform_total: f64,
}

pub fn sensitivity_kappa(
    mesh: &TriMesh,
    forward: &TemperatureField,
    reverse: &TemperatureField,
    params: &PhysicalParams,
) -> Result<KappaSensitivity> {
    check_pair(mesh, forward, reverse)?;
    let f0 = uniform_f0(params)?;
    let qf = heat_flux(mesh, params, forward)?;
    let qr = heat_flux(mesh, params, reverse)?;
    let n = mesh.num_elements();
    if f0 == 0.0 {
        return Ok(KappaSensitivity {
            per_element: vec![0.0; n],
            per_element_flux_form: vec![0.0; n],
            flux_alignment: 0.0,
            uniform_total: 0.0,
        });
    }
    let d = params.thickness;
    let mut per_element = Vec::with_capacity(n);
    let mut alignment = Vec::with_capacity(n);
    for e in 0..n {
        let area = mesh.element_areas()[e];
        let gf = gradient_unchecked(mesh, &forward.values, e);
        let gr = gradient_unchecked(mesh, &reverse.values, e);
        per_element.push(-(d / f0) * area * dot(gr, gf));
        let k = params.kappa.value(e);
        alignment.push(d / (k * k) * area * dot(qr.values[e], qf.values[e]));
    }
    let flux_alignment: f64 = alignment.iter().sum();
    Ok(KappaSensitivity {
        per_element,
        per_element_flux_form: alignment.iter().map(|a| -a / f0).collect(),
        flux_alignment,
        uniform_total: -flux_alignment / f0,
    })
}

/// Parameter perturbed by the finite-difference oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FdTarget {
    Chi,
    /// The same additive change of κ on every element.
    KappaUniform,
    KappaElement(usize),
}

pub const FD_STEP_CHI: f64 = 1e-3;
pub const FD_STEP_KAPPA_UNIFORM: f64 = 1e-3;
pub const FD_STEP_KAPPA_ELEMENT: f64 = 1e-2;

/// `∫ ϑ dΩ` of the forward solution.
pub fn objective(mesh: &TriMesh, field: &TemperatureField) -> f64 {
    mesh.nodal_weights().iter().zip(&field.values).map(|(w, t)| w * t).sum()
}

/// Central difference of Φ under a symmetric perturbation of `target`.
///
/// The step is `rel_step` times the parameter value (the mean κ for
/// `KappaUniform`).
pub fn fd_oracle(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    target: FdTarget,
    rel_step: f64,
) -> Result<f64> {
    fd_oracle_with(mesh, path, params, target, rel_step, &SolveOptions::default())
}

pub fn fd_oracle_with(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    target: FdTarget,
    rel_step: f64,
    options: &SolveOptions,
) -> Result<f64> {
    if !(1e-6..=1e-1).contains(&rel_step) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {rel_step} outside [1e-6, 1e-1]"
        )));
    }
    params.validate(Some(mesh.num_elements()))?;
    let n = mesh.num_elements();
    let kappa = params.kappa.to_vec(n);
    let (lo, hi, step) = match target {
        FdTarget::Chi => {
            let q = params.flow_rate;
            if q == 0.0 {
                return Err(Error::InvalidArgument(
                    "a relative χ step needs a nonzero flow rate".into(),
                ));
            }
            let dq = rel_step * q;
            let step = params.rho_f * params.c_f * dq;
            (params.with_flow_rate(q - dq), params.with_flow_rate(q + dq), step)
        }
        FdTarget::KappaUniform => {
            let delta = rel_step * kappa.iter().sum::<f64>() / n as f64;
            let shift = |s: f64| {
                let shifted = match &params.kappa {
                    ElementField::Uniform(k) => ElementField::Uniform(k + s),
                    ElementField::PerElement(_) => {
                        ElementField::PerElement(kappa.iter().map(|k| k + s).collect())
                    }
                };
                params.with_kappa(shifted)
            };
            (shift(-delta), shift(delta), delta)
        }
        FdTarget::KappaElement(e) => {
            if e >= n {
                return Err(Error::ElementOutOfRange { index: e, count: n });
            }
            let delta = rel_step * kappa[e];
            let bump = |s: f64| {
                let mut k = kappa.clone();
                k[e] += s;
                params.with_kappa(ElementField::PerElement(k))
            };
            (bump(-delta), bump(delta), delta)
        }
    };
    let (minus, plus) = rayon::join(
        || solve_direct_with(mesh, path, &lo, options),
        || solve_direct_with(mesh, path, &hi, options),
    );
    Ok((objective(mesh, &plus?) - objective(mesh, &minus?)) / (2.0 * step))
}

/// Adjoint sensitivities of one forward/reverse pair, optionally checked
/// against finite differences.
#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityReport {
    pub phi: f64,
    pub dphi_chi: f64,
    pub dphi_kappa_field: Vec<f64>,
    pub dphi_kappa_uniform: f64,
    /// Sensitivities of the mean surface temperature (Φ over meas(Ω)).
    pub dmst_chi: f64,
    pub dmst_kappa_uniform: f64,
    pub flux_alignment: f64,
    pub fd_chi: Option<f64>,
    pub fd_kappa_uniform: Option<f64>,
    pub rel_err_chi: Option<f64>,
    pub rel_err_kappa: Option<f64>,
}

fn relative_error(adjoint: f64, fd: f64) -> f64 {
    if fd == 0.0 {
        adjoint.abs()
    } else {
        ((adjoint - fd) / fd).abs()
    }
}

pub fn sensitivity_report(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    forward: &TemperatureField,
    reverse: &TemperatureField,
    with_fd: bool,
    options: &SolveOptions,
) -> Result<SensitivityReport> {
    let dphi_chi = sensitivity_chi(mesh, path, forward, reverse, params)?;
    let kappa = sensitivity_kappa(mesh, forward, reverse, params)?;
    let area = mesh.area();
    let (fd_chi, fd_kappa_uniform) = if with_fd {
        let fd_chi = if params.flow_rate > 0.0 {
            Some(fd_oracle_with(mesh, path, params, FdTarget::Chi, FD_STEP_CHI, options)?)
        } else {
            None
        };
        let fd_k = fd_oracle_with(
            mesh,
            path,
            params,
            FdTarget::KappaUniform,
            FD_STEP_KAPPA_UNIFORM,
            options,
        )?;
        (fd_chi, Some(fd_k))
    } else {
        (None, None)
    };
    Ok(SensitivityReport {
        phi: objective(mesh, forward),
        dphi_chi,
        dmst_chi: dphi_chi / area,
        dmst_kappa_uniform: kappa.uniform_total / area,
        dphi_kappa_uniform: kappa.uniform_total,
        dphi_kappa_field: kappa.per_element,
        flux_alignment: kappa.flux_alignment,
        rel_err_chi: fd_chi.map(|fd| relative_error(dphi_chi, fd)),
        rel_err_kappa: fd_kappa_uniform.map(|fd| relative_error(kappa.uniform_total, fd)),
        fd_chi,
        fd_kappa_uniform,
    })
}
