//! Galerkin assembly with linear triangles.
//!
//! Every integral is computed exactly: gradients are constant per element,
//! the consistent mass matrix integrates products of hat functions, and the
//! line term integrates a hat function against a constant edge derivative.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{dot, TriMesh};
use crate::vasculature::{reverse_orientation, VasculaturePath};

use super::params::PhysicalParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlowDirection {
    Forward,
    Reverse,
}

/// How the prescribed inlet temperature enters the discrete system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum InletTreatment {
    /// The inflow carries `χ ϑ_amb` into the inlet node's equation. The
    /// assembled system then conserves energy exactly, the reverse-flow
    /// operator is the transpose of the forward one, and the inlet value
    /// approaches `ϑ_amb` as the mesh is refined.
    #[default]
    Flux,
    /// The inlet equation is replaced by `ϑ = ϑ_amb`. The inlet value is
    /// exact but the dropped equation carries an O(h) energy defect.
    RowReplacement,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InletCondition {
    pub node: usize,
    pub value: f64,
    pub treatment: InletTreatment,
}

/// An assembled system `A ϑ = b`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `None` for the hot steady state.
    pub inlet: Option<InletCondition>,
    pub chi: f64,
}

/// Conduction, reaction and load contributions shared by every problem.
fn plate_terms(mesh: &TriMesh, params: &PhysicalParams) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let mut triplets = Vec::with_capacity(9 * mesh.num_elements() + 8 * mesh.num_nodes());
    let mut rhs = vec![0.0; mesh.num_nodes()];
    let h = params.h_t;
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = mesh.element_areas()[e];
        let grads = mesh.shape_gradients(e);
        let stiffness = params.thickness * params.kappa.value(e) * area;
        let load = (params.source.value(e) + h * params.theta_amb) * area / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                let mass = if i == j { area / 6.0 } else { area / 12.0 };
                let v = stiffness * dot(grads[i], grads[j]) + h * mass;
                triplets.push((tri[i], tri[j], v));
            }
            rhs[tri[i]] += load;
        }
    }
    (triplets, rhs)
}

/// Assembles the direct (`Forward`) or reverse-flow (`Reverse`) problem.
///
/// The line term `∫_Σ δϑ χ ∂ϑ/∂s` is taken along the flow, so the reverse
/// problem is the forward problem on the reversed path.
pub fn assemble(
    mesh: &TriMesh,
    path: &VasculaturePath,
    params: &PhysicalParams,
    direction: FlowDirection,
    treatment: InletTreatment,
) -> Result<LinearSystem> {
    path.check_mesh(mesh)?;
    params.validate(Some(mesh.num_elements()))?;
    let flow = match direction {
        FlowDirection::Forward => path.clone(),
        FlowDirection::Reverse => reverse_orientation(path),
    };
    let chi = params.heat_capacity_rate();
    let (mut triplets, mut rhs) = plate_terms(mesh, params);

    let half = 0.5 * chi;
    for (a, b) in flow.edge_chain() {
        triplets.extend([(a, a, -half), (a, b, half), (b, a, -half), (b, b, half)]);
    }

    let inlet = InletCondition {
        node: flow.inlet_node(),
        value: params.theta_amb,
        treatment,
    };
    let matrix = match treatment {
        InletTreatment::Flux => {
            triplets.push((inlet.node, inlet.node, chi));
            rhs[inlet.node] += chi * inlet.value;
            CsrMatrix::from_triplets(mesh.num_nodes(), &triplets)
        }
        InletTreatment::RowReplacement => {
            triplets.retain(|&(i, _, _)| i != inlet.node);
            triplets.push((inlet.node, inlet.node, 1.0));
            rhs[inlet.node] = inlet.value;
            CsrMatrix::from_triplets(mesh.num_nodes(), &triplets)
        }
    };
    Ok(LinearSystem {
        matrix,
        rhs,
        inlet: Some(inlet),
        chi,
    })
}

/// Assembles the hot-steady-state problem: no coolant and no inlet condition.
pub fn assemble_hss(mesh: &TriMesh, params: &PhysicalParams) -> Result<LinearSystem> {
    params.validate(Some(mesh.num_elements()))?;
    let (triplets, rhs) = plate_terms(mesh, params);
    if !(params.h_t > 0.0) {
        return Err(Error::InvalidArgument("hot steady state requires h_t > 0".into()));
    }
    Ok(LinearSystem {
        matrix: CsrMatrix::from_triplets(mesh.num_nodes(), &triplets),
        rhs,
        inlet: None,
        chi: 0.0,
    })
}
