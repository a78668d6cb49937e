//! Direct, reverse-flow and hot-steady-state temperature solves.

mod assembly;
mod params;

pub use assembly::{
    assemble, assemble_hss, FlowDirection, InletCondition, InletTreatment, LinearSystem,
};
pub use params::{
    heat_capacity_rate, ml_min_to_m3s, ElementField, Material, PhysicalParams, ML_MIN_PER_M3S,
};

use crate::error::{Error, Result};
use crate::linalg::{norm2, BandedLu};
use crate::mesh::TriMesh;
use crate::vasculature::VasculaturePath;

/// Which problem produced a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Forward,
    Reverse,
    Hss,
}

impl From<FlowDirection> for FieldKind {
    fn from(d: FlowDirection) -> Self {
        match d {
            FlowDirection::Forward => FieldKind::Forward,
            FlowDirection::Reverse => FieldKind::Reverse,
        }
    }
}

/// Nodal temperatures with the metadata of the solve that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureField {
    pub values: Vec<f64>,
    pub kind: FieldKind,
    /// Relative residual `|b - A ϑ| / |b|` of the final iterate.
    pub residual_norm: f64,
    pub chi_used: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Bound on the relative residual.
    pub tolerance: f64,
    pub inlet: InletTreatment,
    /// Iterative-refinement sweeps allowed after the first solve.
    pub max_refinements: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            inlet: InletTreatment::Flux,
            max_refinements: 3,
        }
    }
}

/// Solves an assembled system by banded LU with iterative refinement.
///
/// Returns the solution and its relative residual.
pub fn solve_system(system: &LinearSystem, tolerance: f64, max_refinements: usize) -> Result<(Vec<f64>, f64)> {
    let lu = BandedLu::factorize(&system.matrix)?;
    let b = &system.rhs;
    let scale = norm2(b);
    let relative = |x: &[f64]| -> (Vec<f64>, f64) {
        let ax = system.matrix.mul_vec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let n = norm2(&r);
        let rel = if scale > 0.0 { n / scale } else { n };
        (r, rel)
    };

    let mut x = lu.solve(b);
    let (mut r, mut rel) = relative(&x);
    let mut history = vec![rel];
    for _ in 0..max_refinements {
        if rel <= tolerance {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        (r, rel) = relative(&x);
        history.push(rel);
    }
    if !(rel <= tolerance) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverDiverged { tolerance, history });
    }
    Ok((x, rel))
}

fn solve_flow(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    direction: FlowDirection,
    options: &SolveOptions,
) -> Result<TemperatureField> {
    let system = assemble(mesh, path, params, direction, options.inlet)?;
    let (values, residual_norm) = solve_system(&system, options.tolerance, options.max_refinements)?;
    Ok(TemperatureField {
        values,
        kind: direction.into(),
        residual_norm,
        chi_used: system.chi,
    })
}

/// Temperature under forward flow (inlet at s = 0).
pub fn solve_direct(mesh: &TriMesh, path: &VasculaturePath, params: &PhysicalParams) -> Result<TemperatureField> {
    solve_direct_with(mesh, path, params, &SolveOptions::default())
}

pub fn solve_direct_with(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    options: &SolveOptions,
) -> Result<TemperatureField> {
    solve_flow(mesh, path, params, FlowDirection::Forward, options)
}

/// Temperature with the inlet and outlet swapped (inlet at s = 1).
pub fn solve_reverse(mesh: &TriMesh, path: &VasculaturePath, params: &PhysicalParams) -> Result<TemperatureField> {
    solve_reverse_with(mesh, path, params, &SolveOptions::default())
}

pub fn solve_reverse_with(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    options: &SolveOptions,
) -> Result<TemperatureField> {
    solve_flow(mesh, path, params, FlowDirection::Reverse, options)
}

/// Hot steady state: no coolant flow and no inlet condition.
pub fn solve_hss(mesh: &TriMesh, params: &PhysicalParams) -> Result<TemperatureField> {
    solve_hss_with(mesh, params, &SolveOptions::default())
}

pub fn solve_hss_with(mesh: &TriMesh, params: &PhysicalParams, options: &SolveOptions) -> Result<TemperatureField> {
    let system = assemble_hss(mesh, params)?;
    let (values, residual_norm) = solve_system(&system, options.tolerance, options.max_refinements)?;
    Ok(TemperatureField {
        values,
        kind: FieldKind::Hss,
        residual_norm,
        chi_used: 0.0,
    })
}
