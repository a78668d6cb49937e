//! The embedded vasculature: a simple chain of mesh edges carrying the
//! coolant, parameterized by normalized arc length from inlet to outlet.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::mesh::{dot, norm, sub, Point, TriMesh};

/// A node-aligned channel path through a [`TriMesh`].
///
/// The geometry is stored once in its construction order; reversing the
/// orientation only flips a flag, so reversing twice gives back an identical
/// path.
#[derive(Clone, Debug, PartialEq)]
pub struct VasculaturePath {
    nodes: Vec<usize>,
    points: Vec<Point>,
    /// Cumulative arc length in construction order, starting at 0.
    arc: Vec<f64>,
    reversed: bool,
}

impl VasculaturePath {
    /// Builds a path from an ordered node chain of `mesh`.
    pub fn from_nodes(mesh: &TriMesh, nodes: Vec<usize>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Embedding("a path needs at least two nodes".into()));
        }
        let n = mesh.num_nodes();
        if let Some(&bad) = nodes.iter().find(|&&v| v >= n) {
            return Err(Error::Mismatch(format!("path node {bad} is not a mesh node")));
        }
        let mut seen = vec![false; n];
        for &v in &nodes {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::Embedding(format!("path revisits node {v}")));
            }
        }
        for w in nodes.windows(2) {
            if !mesh.has_edge(w[0], w[1]) {
                return Err(Error::Embedding(format!(
                    "nodes {} and {} do not share a mesh edge",
                    w[0], w[1]
                )));
            }
        }
        let on_boundary = mesh.boundary_nodes();
        if let Some(&v) = nodes[1..nodes.len() - 1].iter().find(|&&v| on_boundary[v]) {
            return Err(Error::Embedding(format!(
                "path touches the plate boundary at interior node {v}"
            )));
        }

        let points: Vec<Point> = nodes.iter().map(|&v| mesh.nodes()[v]).collect();
        let mut arc = Vec::with_capacity(points.len());
        arc.push(0.0);
        for w in points.windows(2) {
            let last = *arc.last().unwrap();
            arc.push(last + norm(sub(w[1], w[0])));
        }
        Ok(Self {
            nodes,
            points,
            arc,
            reversed: false,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.len() - 1
    }

    fn oriented(&self, k: usize) -> usize {
        if self.reversed {
            self.nodes.len() - 1 - k
        } else {
            k
        }
    }

    /// Mesh node at position `k` counted from the inlet (s = 0).
    pub fn node(&self, k: usize) -> usize {
        self.nodes[self.oriented(k)]
    }

    pub fn point(&self, k: usize) -> Point {
        self.points[self.oriented(k)]
    }

    /// Node indices ordered from inlet to outlet.
    pub fn node_sequence(&self) -> Vec<usize> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// Consecutive node pairs in order of increasing s.
    pub fn edge_chain(&self) -> Vec<(usize, usize)> {
        (0..self.num_edges())
            .map(|k| (self.node(k), self.node(k + 1)))
            .collect()
    }

    pub fn total_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    /// Normalized arc length of the `k`-th node.
    pub fn s(&self, k: usize) -> f64 {
        let total = self.total_length();
        if self.reversed {
            1.0 - self.arc[self.nodes.len() - 1 - k] / total
        } else {
            self.arc[k] / total
        }
    }

    pub fn s_values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.s(k)).collect()
    }

    pub fn edge_length(&self, k: usize) -> f64 {
        let (a, b) = (self.point(k), self.point(k + 1));
        norm(sub(b, a))
    }

    /// Unit tangent of edge `k`, pointing toward increasing s.
    pub fn tangent(&self, k: usize) -> Point {
        let d = sub(self.point(k + 1), self.point(k));
        let len = norm(d);
        [d[0] / len, d[1] / len]
    }

    pub fn tangents(&self) -> Vec<Point> {
        (0..self.num_edges()).map(|k| self.tangent(k)).collect()
    }

    /// Node at s = 0.
    pub fn inlet_node(&self) -> usize {
        self.node(0)
    }

    /// Node at s = 1.
    pub fn outlet_node(&self) -> usize {
        self.node(self.len() - 1)
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub(crate) fn check_mesh(&self, mesh: &TriMesh) -> Result<()> {
        let n = mesh.num_nodes();
        for (&v, p) in self.nodes.iter().zip(&self.points) {
            if v >= n || mesh.nodes()[v] != *p {
                return Err(Error::Mismatch("vasculature path does not belong to this mesh".into()));
            }
        }
        Ok(())
    }
}

/// Swaps inlet and outlet: nodes reversed, tangents negated, s mapped to 1 - s.
pub fn reverse_orientation(path: &VasculaturePath) -> VasculaturePath {
    VasculaturePath {
        reversed: !path.reversed,
        ..path.clone()
    }
}

/// `(s, value)` pairs along the path, ordered by s.
pub fn profile_along(path: &VasculaturePath, field: &[f64]) -> Vec<(f64, f64)> {
    (0..path.len())
        .map(|k| (path.s(k), field[path.node(k)]))
        .collect()
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let t = (dot(sub(p, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Shortest edge path from `start` to `goal` using only nodes within `tol` of segment `a -> b`.
fn corridor_path(
    mesh: &TriMesh,
    start: usize,
    goal: usize,
    a: Point,
    b: Point,
    tol: f64,
) -> Option<Vec<usize>> {
    let n = mesh.num_nodes();
    let inside = |v: usize| point_segment_distance(mesh.nodes()[v], a, b) <= tol;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    // Nonnegative f64 bit patterns order like the values themselves.
    heap.push(Reverse((0.0f64.to_bits(), start)));
    while let Some(Reverse((bits, v))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[v] {
            continue;
        }
        if v == goal {
            break;
        }
        for &w in mesh.neighbors(v) {
            if !inside(w) {
                continue;
            }
            let nd = d + norm(sub(mesh.nodes()[w], mesh.nodes()[v]));
            if nd < dist[w] {
                dist[w] = nd;
                prev[w] = v;
                heap.push(Reverse((nd.to_bits(), w)));
            }
        }
    }
    if !dist[goal].is_finite() {
        return None;
    }
    let mut chain = vec![goal];
    let mut v = goal;
    while v != start {
        v = prev[v];
        chain.push(v);
    }
    chain.reverse();
    Some(chain)
}

/// Snaps a polyline onto mesh edges.
///
/// Each waypoint maps to its nearest node (which must be within `snap_tol`),
/// and consecutive waypoints are joined by the shortest edge chain whose
/// nodes stay within `snap_tol` of the polyline segment.
pub fn embed_polyline(mesh: &TriMesh, waypoints: &[Point], snap_tol: f64) -> Result<VasculaturePath> {
    if waypoints.len() < 2 {
        return Err(Error::InvalidArgument("a polyline needs at least two waypoints".into()));
    }
    if !(snap_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("snap tolerance must be >= 0, got {snap_tol}")));
    }
    if let Some(w) = waypoints.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("repeated waypoint {:?}", w[0])));
    }
    let ext = mesh.extent();
    let tol = snap_tol + 1e-9 * ext[0].max(ext[1]);

    let anchors = waypoints
        .iter()
        .map(|&p| {
            let v = mesh.nearest_node(p);
            let d = norm(sub(mesh.nodes()[v], p));
            if d > tol {
                Err(Error::Embedding(format!(
                    "waypoint {p:?} is {d:e} m from the nearest node (tolerance {snap_tol:e})"
                )))
            } else {
                Ok(v)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut nodes = vec![anchors[0]];
    for (k, w) in anchors.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::Embedding(format!(
                "waypoints {k} and {} snap to the same node",
                k + 1
            )));
        }
        let chain = corridor_path(mesh, w[0], w[1], waypoints[k], waypoints[k + 1], tol)
            .ok_or_else(|| {
                Error::Embedding(format!(
                    "no edge chain within {snap_tol:e} m of segment {:?} -> {:?}",
                    waypoints[k],
                    waypoints[k + 1]
                ))
            })?;
        nodes.extend_from_slice(&chain[1..]);
    }
    VasculaturePath::from_nodes(mesh, nodes)
}

pub const DEFAULT_U_BOTTOM: f64 = 0.02;
pub const DEFAULT_SERPENTINE_PASSES: usize = 5;
pub const DEFAULT_SERPENTINE_MARGIN: f64 = 0.01;

/// Built-in channel layouts.
#[derive(Clone, Debug, PartialEq)]
pub enum VascularCase {
    /// Horizontal channel from the left edge to the right edge at height `y`
    /// (mid-height when `None`).
    Straight { y: Option<f64> },
    /// Inlet on the top edge, down the left leg to `bottom_y`, across, and back
    /// up the right leg to the outlet. The legs are `spacing` apart and
    /// centered as closely as the mesh allows.
    UShape { spacing: f64, bottom_y: f64 },
    /// Boustrophedon of vertical passes between `margin` and `H - margin`,
    /// entering from the top edge and leaving through the top or bottom edge.
    Serpentine { passes: usize, margin: f64 },
    /// Arbitrary waypoints, snapped to mesh edges.
    Polyline { waypoints: Vec<Point>, snap_tol: f64 },
}

impl VascularCase {
    pub fn u_shape(spacing: f64) -> Self {
        VascularCase::UShape {
            spacing,
            bottom_y: DEFAULT_U_BOTTOM,
        }
    }

    pub fn serpentine() -> Self {
        VascularCase::Serpentine {
            passes: DEFAULT_SERPENTINE_PASSES,
            margin: DEFAULT_SERPENTINE_MARGIN,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            VascularCase::Straight { .. } => "straight",
            VascularCase::UShape { .. } => "u_shape",
            VascularCase::Serpentine { .. } => "serpentine",
            VascularCase::Polyline { .. } => "custom",
        }
    }

    /// Waypoints of this layout on a domain of the given extent.
    pub fn waypoints(&self, mesh: &TriMesh) -> Result<Vec<Point>> {
        let [length, height] = mesh.extent();
        match self {
            VascularCase::Straight { y } => {
                let y = y.unwrap_or(0.5 * height);
                if !(y > 0.0 && y < height) {
                    return Err(Error::Embedding(format!("channel height {y} is outside the plate")));
                }
                Ok(vec![[0.0, y], [length, y]])
            }
            VascularCase::UShape { spacing, bottom_y } => {
                if !(*spacing > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "U-shape spacing must be positive, got {spacing}"
                    )));
                }
                if *spacing >= length {
                    return Err(Error::Embedding(format!(
                        "U-shape spacing {spacing} m does not fit in a plate {length} m wide"
                    )));
                }
                if !(*bottom_y > 0.0 && *bottom_y < height) {
                    return Err(Error::Embedding(format!(
                        "U-shape bottom {bottom_y} m is outside the plate"
                    )));
                }
                // Left leg on the top-edge node nearest the centered position;
                // the right leg then sits exactly `spacing` further along.
                let target = 0.5 * (length - spacing);
                let x_left = mesh
                    .nodes()
                    .iter()
                    .filter(|p| p[1] == height)
                    .map(|p| p[0])
                    .filter(|&x| x > 0.0 && x + spacing < length)
                    .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
                    .ok_or_else(|| {
                        Error::Embedding(format!("no room for U-shape legs {spacing} m apart"))
                    })?;
                let x_right = x_left + spacing;
                Ok(vec![
                    [x_left, height],
                    [x_left, *bottom_y],
                    [x_right, *bottom_y],
                    [x_right, height],
                ])
            }
            VascularCase::Serpentine { passes, margin } => {
                if *passes == 0 {
                    return Err(Error::InvalidArgument("serpentine needs at least one pass".into()));
                }
                if !(*margin > 0.0 && 2.0 * margin < length.min(height)) {
                    return Err(Error::Embedding(format!(
                        "serpentine margin {margin} m does not fit the plate"
                    )));
                }
                let (lo, hi) = (*margin, height - margin);
                let xs: Vec<f64> = if *passes == 1 {
                    vec![0.5 * length]
                } else {
                    let pitch = (length - 2.0 * margin) / (*passes - 1) as f64;
                    (0..*passes).map(|k| margin + pitch * k as f64).collect()
                };
                let mut pts = vec![[xs[0], height]];
                for (k, &x) in xs.iter().enumerate() {
                    let down = k % 2 == 0;
                    if k > 0 {
                        pts.push([x, if down { hi } else { lo }]);
                    }
                    pts.push([x, if down { lo } else { hi }]);
                }
                // Leave through the nearest plate edge.
                let last = *pts.last().unwrap();
                pts.pop();
                pts.push([last[0], if last[1] == lo { 0.0 } else { height }]);
                Ok(pts)
            }
            VascularCase::Polyline { waypoints, .. } => Ok(waypoints.clone()),
        }
    }
}

/// Embeds one of the built-in layouts on `mesh`.
pub fn make_case(case: &VascularCase, mesh: &TriMesh) -> Result<VasculaturePath> {
    let waypoints = case.waypoints(mesh)?;
    let tol = match case {
        VascularCase::Polyline { snap_tol, .. } => *snap_tol,
        _ => 0.0,
    };
    embed_polyline(mesh, &waypoints, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, Diagonal};

    fn plate(n: usize, diag: Diagonal) -> TriMesh {
        build_structured_mesh(0.1, 0.1, n, n, diag).unwrap()
    }

    #[test]
    fn horizontal_centerline() {
        let mesh = plate(100, Diagonal::Right);
        let path = embed_polyline(&mesh, &[[0.0, 0.05], [0.1, 0.05]], 0.0).unwrap();
        assert_eq!(path.num_edges(), 100);
        assert!((path.total_length() - 0.1).abs() < 1e-12 * 0.1);
        for t in path.tangents() {
            assert!((t[0] - 1.0).abs() < 1e-12 && t[1].abs() < 1e-12);
        }
        assert_eq!(mesh.nodes()[path.inlet_node()], [0.0, 0.05]);
        assert_eq!(mesh.nodes()[path.outlet_node()], [0.1, 0.05]);
    }

    #[test]
    fn straight_case_matches_centerline() {
        let mesh = plate(100, Diagonal::Alternating);
        let path = make_case(&VascularCase::Straight { y: None }, &mesh).unwrap();
        assert_eq!(mesh.nodes()[path.inlet_node()], [0.0, 0.05]);
        assert_eq!(mesh.nodes()[path.outlet_node()], [0.1, 0.05]);
    }

    #[test]
    fn u_shape_orientation_and_spacing() {
        let mesh = plate(100, Diagonal::Alternating);
        let path = make_case(&VascularCase::u_shape(0.02), &mesh).unwrap();
        let pts: Vec<Point> = (0..path.len()).map(|k| path.point(k)).collect();
        let x_left = pts[0][0];
        let x_right = pts.last().unwrap()[0];
        assert!(((x_right - x_left) - 0.02).abs() < 1e-12);
        assert_eq!(pts[0][1], 0.1);
        assert_eq!(pts.last().unwrap()[1], 0.1);
        for (k, t) in path.tangents().iter().enumerate() {
            let (a, b) = (pts[k], pts[k + 1]);
            let expected = if a[0] == x_left && b[0] == x_left {
                [0.0, -1.0]
            } else if a[0] == x_right && b[0] == x_right {
                [0.0, 1.0]
            } else {
                [1.0, 0.0]
            };
            assert!((t[0] - expected[0]).abs() < 1e-12 && (t[1] - expected[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn u_shape_too_wide() {
        let mesh = plate(20, Diagonal::Right);
        assert!(matches!(
            make_case(&VascularCase::u_shape(0.2), &mesh),
            Err(Error::Embedding(_))
        ));
    }

    #[test]
    fn anti_diagonal_without_edges_fails() {
        // Right-leaning diagonals only; the other diagonal has no edges.
        let mesh = plate(10, Diagonal::Right);
        let err = embed_polyline(&mesh, &[[0.02, 0.08], [0.08, 0.02]], 0.0).unwrap_err();
        assert!(matches!(err, Error::Embedding(_)), "{err}");
        // The leaning diagonal is representable.
        embed_polyline(&mesh, &[[0.02, 0.02], [0.08, 0.08]], 0.0).unwrap();
    }

    #[test]
    fn serpentine_layout() {
        let mesh = plate(100, Diagonal::Alternating);
        let path = make_case(&VascularCase::serpentine(), &mesh).unwrap();
        let first = path.point(0);
        let last = path.point(path.len() - 1);
        assert_eq!(first, [0.01, 0.1]);
        assert!((last[0] - 0.09).abs() < 1e-12 && last[1] == 0.0);
        // 5 passes of 0.08 m, 4 connectors of 0.02 m, plus the two feed stubs.
        let expected = 5.0 * 0.08 + 4.0 * 0.02 + 0.01 + 0.01;
        assert!((path.total_length() - expected).abs() < 1e-12);
    }

    #[test]
    fn reversal() {
        let mesh = plate(10, Diagonal::Right);
        let path = embed_polyline(&mesh, &[[0.0, 0.05], [0.1, 0.05]], 0.0).unwrap();
        let rev = reverse_orientation(&path);
        for t in rev.tangents() {
            assert_eq!(t, [-1.0, 0.0]);
        }
        assert_eq!(rev.inlet_node(), path.outlet_node());
        let mut seq = path.node_sequence();
        seq.reverse();
        assert_eq!(rev.node_sequence(), seq);
        assert_eq!(reverse_orientation(&rev), path);
    }

    #[test]
    fn reversal_remaps_s() {
        // Three columns at x = 0, 0.25, 1 so the middle row has uneven edges.
        let xs = [0.0, 0.25, 1.0];
        let nodes: Vec<Point> = (0..3)
            .flat_map(|j| xs.iter().map(move |&x| [x, 0.5 * j as f64]))
            .collect();
        let mut elements = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                let p = j * 3 + i;
                elements.push([p, p + 1, p + 4]);
                elements.push([p, p + 4, p + 3]);
            }
        }
        let mesh = TriMesh::new(nodes, elements, vec![]).unwrap();
        let path = VasculaturePath::from_nodes(&mesh, vec![3, 4, 5]).unwrap();
        assert_eq!(path.s_values(), vec![0.0, 0.25, 1.0]);
        let rev = reverse_orientation(&path);
        assert_eq!(rev.s_values(), vec![0.0, 0.75, 1.0]);
        assert_eq!(rev.node_sequence(), vec![5, 4, 3]);
        assert_eq!(reverse_orientation(&rev), path);
    }

    #[test]
    fn profile_of_constant_field() {
        let mesh = plate(10, Diagonal::Right);
        let path = make_case(&VascularCase::Straight { y: None }, &mesh).unwrap();
        let prof = profile_along(&path, &vec![7.0; mesh.num_nodes()]);
        assert_eq!(prof.len(), 11);
        assert!(prof.iter().all(|&(_, v)| v == 7.0));
        assert!(prof.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn path_length_and_tangents_consistent() {
        let mesh = plate(20, Diagonal::Alternating);
        let path = make_case(&VascularCase::serpentine(), &mesh).unwrap();
        let sum: f64 = (0..path.num_edges()).map(|k| path.edge_length(k)).sum();
        assert!((sum - path.total_length()).abs() <= 1e-12 * sum);
        let s = path.s_values();
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((s[0], *s.last().unwrap()), (0.0, 1.0));
    }

    #[test]
    fn rejects_boundary_hugging_path() {
        let mesh = plate(4, Diagonal::Right);
        let err = embed_polyline(&mesh, &[[0.0, 0.0], [0.1, 0.0]], 0.0).unwrap_err();
        assert!(err.to_string().contains("boundary"), "{err}");
    }
}
