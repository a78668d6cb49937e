//! Conforming triangulations of the rectangular plate.
//!
//! A [`TriMesh`] is immutable once built: node coordinates, counterclockwise
//! P1 elements, tagged boundary edges, and per-element areas and shape
//! function gradients are all fixed at construction time, so a mesh can be
//! shared freely between concurrent solves.

mod format;
mod trace;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

pub use format::{load_mesh, write_mesh};
pub use trace::{avg_scalar, avg_vector, jump_scalar, jump_vector, SidedTrace};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Side of the rectangle a boundary edge lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Top => "top",
            Side::Bottom => "bottom",
        };
        f.write_str(s)
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "top" => Ok(Side::Top),
            "bottom" => Ok(Side::Bottom),
            other => Err(format!("unknown boundary tag `{other}`")),
        }
    }
}

/// Which way each structured cell is split into two triangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Right,
    /// Lower-right to upper-left.
    Left,
    /// Checkerboard of the two, avoiding a preferred direction.
    Alternating,
}

impl FromStr for Diagonal {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "right" => Ok(Diagonal::Right),
            "left" => Ok(Diagonal::Left),
            "alternating" => Ok(Diagonal::Alternating),
            other => Err(format!("unknown diagonal pattern `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    areas: Vec<f64>,
    /// Constant gradients of the three local shape functions.
    shape_grads: Vec<[Point; 3]>,
    neighbors: Vec<Vec<usize>>,
    extent: Point,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    /// Validates the mesh invariants and precomputes element geometry.
    pub fn new(
        nodes: Vec<Point>,
        elements: Vec<[usize; 3]>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        if nodes.is_empty() || elements.is_empty() {
            return Err(Error::MeshInvariant("mesh has no nodes or no elements".into()));
        }
        let n = nodes.len();
        if let Some(p) = nodes.iter().find(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::MeshInvariant(format!("non-finite node coordinate {p:?}")));
        }

        let mut extent = [0.0f64; 2];
        let mut lower = [f64::INFINITY; 2];
        for p in &nodes {
            for k in 0..2 {
                extent[k] = extent[k].max(p[k]);
                lower[k] = lower[k].min(p[k]);
            }
        }
        let scale = extent[0].max(extent[1]);
        if lower[0] < -1e-12 * scale || lower[1] < -1e-12 * scale {
            return Err(Error::MeshInvariant(format!(
                "nodes must lie in [0, L] x [0, H]; found minimum corner {lower:?}"
            )));
        }

        let mut areas = Vec::with_capacity(elements.len());
        let mut shape_grads = Vec::with_capacity(elements.len());
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for (e, tri) in elements.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= n) {
                return Err(Error::MeshInvariant(format!(
                    "element {e} references node {bad} but mesh has {n} nodes"
                )));
            }
            let [a, b, c] = tri.map(|v| nodes[v]);
            let area = signed_area(a, b, c);
            if area <= 0.0 {
                return Err(Error::MeshInvariant(format!(
                    "element {e} is inverted or degenerate (signed area {area:e})"
                )));
            }
            let inv = 1.0 / (2.0 * area);
            shape_grads.push([
                [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv],
                [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv],
                [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv],
            ]);
            areas.push(area);
            for k in 0..3 {
                *edge_count.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }

        for (k, be) in boundary.iter().enumerate() {
            let [i, j] = be.nodes;
            if i >= n || j >= n {
                return Err(Error::MeshInvariant(format!(
                    "boundary edge {k} references a node beyond {n}"
                )));
            }
            if edge_count.get(&edge_key(i, j)).copied() != Some(1) {
                return Err(Error::MeshInvariant(format!(
                    "boundary edge {k} ({i}, {j}) does not belong to exactly one element"
                )));
            }
        }

        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edge_count.keys() {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        // Connectivity: every node reachable through element edges.
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != n {
            return Err(Error::MeshInvariant(format!(
                "mesh is not connected ({reached} of {n} nodes reachable)"
            )));
        }

        Ok(Self {
            nodes,
            elements,
            boundary,
            areas,
            shape_grads,
            neighbors,
            extent,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn element_areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Gradients of the three P1 shape functions of element `e`.
    pub fn shape_gradients(&self, e: usize) -> &[Point; 3] {
        &self.shape_grads[e]
    }

    /// Sorted list of nodes sharing an element edge with `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// Upper-right corner `(L, H)` of the domain.
    pub fn extent(&self) -> Point {
        self.extent
    }

    /// meas(Ω), the total plate area.
    pub fn area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Lumped weights `∫ φ_i dΩ` of each nodal basis function.
    pub fn nodal_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.nodes.len()];
        for (tri, &area) in self.elements.iter().zip(&self.areas) {
            for &v in tri {
                w[v] += area / 3.0;
            }
        }
        w
    }

    /// Whether a node sits on a tagged boundary edge.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.nodes.len()];
        for be in &self.boundary {
            on[be.nodes[0]] = true;
            on[be.nodes[1]] = true;
        }
        on
    }

    /// Index of the node closest to `p` (lowest index on ties).
    pub fn nearest_node(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.nodes.iter().enumerate() {
            let d = norm(sub(*q, p));
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn centroid(&self, e: usize) -> Point {
        let [a, b, c] = self.elements[e].map(|v| self.nodes[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub(crate) fn check_field(&self, field: &[f64], what: &str) -> Result<()> {
        if field.len() != self.nodes.len() {
            return Err(Error::Mismatch(format!(
                "{what} has {} values but the mesh has {} nodes",
                field.len(),
                self.nodes.len()
            )));
        }
        Ok(())
    }
}

/// Uniform triangulation of `[0, L] x [0, H]` with `nx * ny` cells split in two.
///
/// Nodes are numbered row by row from the lower-left corner, which keeps the
/// assembled matrices banded.
pub fn build_structured_mesh(
    length: f64,
    height: f64,
    nx: usize,
    ny: usize,
    diagonal: Diagonal,
) -> Result<TriMesh> {
    if !(length > 0.0 && length.is_finite() && height > 0.0 && height.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "domain dimensions must be positive, got {length} x {height}"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "cell counts must be at least 1, got {nx} x {ny}"
        )));
    }
    let coord = |i: usize, n: usize, extent: f64| {
        if i == n {
            extent
        } else {
            extent * i as f64 / n as f64
        }
    };
    let id = |i: usize, j: usize| j * (nx + 1) + i;

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([coord(i, nx, length), coord(j, ny, height)]);
        }
    }

    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            let right = match diagonal {
                Diagonal::Right => true,
                Diagonal::Left => false,
                Diagonal::Alternating => (i + j) % 2 == 0,
            };
            if right {
                elements.push([p00, p10, p11]);
                elements.push([p00, p11, p01]);
            } else {
                elements.push([p00, p10, p01]);
                elements.push([p10, p11, p01]);
            }
        }
    }

    let mut boundary = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary.push(BoundaryEdge { nodes: [id(i, 0), id(i + 1, 0)], side: Side::Bottom });
    }
    for j in 0..ny {
        boundary.push(BoundaryEdge { nodes: [id(nx, j), id(nx, j + 1)], side: Side::Right });
    }
    for i in (0..nx).rev() {
        boundary.push(BoundaryEdge { nodes: [id(i + 1, ny), id(i, ny)], side: Side::Top });
    }
    for j in (0..ny).rev() {
        boundary.push(BoundaryEdge { nodes: [id(0, j + 1), id(0, j)], side: Side::Left });
    }

    TriMesh::new(nodes, elements, boundary)
}

/// Constant gradient of the linear interpolant of `field` on element `element`.
pub fn element_gradient(mesh: &TriMesh, field: &[f64], element: usize) -> Result<Point> {
    mesh.check_field(field, "field")?;
    if element >= mesh.num_elements() {
        return Err(Error::ElementOutOfRange {
            index: element,
            count: mesh.num_elements(),
        });
    }
    Ok(gradient_unchecked(mesh, field, element))
}

#[inline]
pub(crate) fn gradient_unchecked(mesh: &TriMesh, field: &[f64], e: usize) -> Point {
    let tri = mesh.elements[e];
    let g = &mesh.shape_grads[e];
    let mut out = [0.0; 2];
    for k in 0..3 {
        out[0] += field[tri[k]] * g[k][0];
        out[1] += field[tri[k]] * g[k][1];
    }
    out
}
