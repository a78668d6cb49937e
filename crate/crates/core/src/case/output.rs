//! CSV and legacy-VTK writers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};
use crate::vasculature::VasculaturePath;

pub const CSV_HEADER: &str = "param,mst_K,theta_out_K,eta,dphi_chi,dphi_kappa,inv_gap_K,energy_res_W";

/// One line of a results table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Swept value in its config unit (mL/min or W/m/K).
    pub param: f64,
    pub mst: f64,
    pub theta_outlet: f64,
    pub efficiency: f64,
    pub dphi_chi: f64,
    pub dphi_kappa: f64,
    pub invariance_gap: f64,
    pub energy_residual: f64,
    /// Set when the point failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

impl SweepRow {
    pub fn failed(param: f64, error: String) -> Self {
        Self {
            param,
            mst: f64::NAN,
            theta_outlet: f64::NAN,
            efficiency: f64::NAN,
            dphi_chi: f64::NAN,
            dphi_kappa: f64::NAN,
            invariance_gap: f64::NAN,
            energy_residual: f64::NAN,
            error: Some(error),
        }
    }
}

/// Formats rows under [`CSV_HEADER`]. Failed points print `NaN` in every
/// numeric column. Floats use the shortest round-trip representation, so
/// identical results give identical bytes.
pub fn export_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.param,
            r.mst,
            r.theta_outlet,
            r.efficiency,
            r.dphi_chi,
            r.dphi_kappa,
            r.invariance_gap,
            r.energy_residual
        );
    }
    out
}

/// Temperature along the channel, ordered from the forward inlet.
pub fn export_profile(path: &VasculaturePath, forward: &[f64], reverse: &[f64]) -> String {
    let mut out = String::from("s,x_m,y_m,theta_fwd_K,theta_rev_K\n");
    for k in 0..path.len() {
        let p = path.point(k);
        let v = path.node(k);
        let _ = writeln!(out, "{:?},{:?},{:?},{:?},{:?}", path.s(k), p[0], p[1], forward[v], reverse[v]);
    }
    out
}

/// Named data arrays for a VTK file.
#[derive(Default)]
pub struct VtkFields<'a> {
    pub point_scalars: Vec<(&'a str, &'a [f64])>,
    pub cell_scalars: Vec<(&'a str, &'a [f64])>,
    pub cell_vectors: Vec<(&'a str, &'a [Point])>,
}

/// Legacy ASCII unstructured grid with linear triangles (cell type 5).
pub fn export_vtk(mesh: &TriMesh, title: &str, fields: &VtkFields<'_>) -> Result<String> {
    let (n, m) = (mesh.num_nodes(), mesh.num_elements());
    for (name, v) in &fields.point_scalars {
        if v.len() != n {
            return Err(Error::Mismatch(format!("point field `{name}` has {} values for {n} nodes", v.len())));
        }
    }
    for (name, len) in fields
        .cell_scalars
        .iter()
        .map(|(k, v)| (k, v.len()))
        .chain(fields.cell_vectors.iter().map(|(k, v)| (k, v.len())))
    {
        if len != m {
            return Err(Error::Mismatch(format!("cell field `{name}` has {len} values for {m} elements")));
        }
    }

    let mut out = String::new();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let _ = write!(
        out,
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {n} double\n"
    );
    for p in mesh.nodes() {
        let _ = writeln!(out, "{:?} {:?} 0", p[0], p[1]);
    }
    let _ = writeln!(out, "CELLS {m} {}", 4 * m);
    for t in mesh.elements() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {m}");
    for _ in 0..m {
        out.push_str("5\n");
    }
    if !fields.point_scalars.is_empty() {
        let _ = writeln!(out, "POINT_DATA {n}");
        for (name, values) in &fields.point_scalars {
            scalars(&mut out, name, values);
        }
    }
    if !fields.cell_scalars.is_empty() || !fields.cell_vectors.is_empty() {
        let _ = writeln!(out, "CELL_DATA {m}");
        for (name, values) in &fields.cell_scalars {
            scalars(&mut out, name, values);
        }
        for (name, values) in &fields.cell_vectors {
            let _ = writeln!(out, "VECTORS {name} double");
            for v in values.iter() {
                let _ = writeln!(out, "{:?} {:?} 0", v[0], v[1]);
            }
        }
    }
    Ok(out)
}

fn scalars(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(out, "{v:?}");
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
