use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Milliliters per minute in one cubic meter per second.
pub const ML_MIN_PER_M3S: f64 = 60_000_000.0;

/// Converts mL/min to m³/s by exact division.
pub fn ml_min_to_m3s(q: f64) -> f64 {
    q / ML_MIN_PER_M3S
}

/// A per-element scalar: either one value for the whole plate or one per element.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementField {
    Uniform(f64),
    PerElement(Vec<f64>),
}

impl ElementField {
    pub fn value(&self, element: usize) -> f64 {
        match self {
            ElementField::Uniform(v) => *v,
            ElementField::PerElement(vs) => vs[element],
        }
    }

    /// The common value when the field is constant, including per-element
    /// fields whose entries are all equal.
    pub fn as_uniform(&self) -> Option<f64> {
        match self {
            ElementField::Uniform(v) => Some(*v),
            ElementField::PerElement(vs) => {
                let first = *vs.first()?;
                vs.iter().all(|&v| v == first).then_some(first)
            }
        }
    }

    /// Expands to one value per element.
    pub fn to_vec(&self, num_elements: usize) -> Vec<f64> {
        (0..num_elements).map(|e| self.value(e)).collect()
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            ElementField::Uniform(v) => ElementField::Uniform(v * factor),
            ElementField::PerElement(vs) => {
                ElementField::PerElement(vs.iter().map(|v| v * factor).collect())
            }
        }
    }

    fn check(&self, name: &str, num_elements: Option<usize>, ok: impl Fn(f64) -> bool) -> Result<()> {
        match self {
            ElementField::Uniform(v) if !ok(*v) => {
                Err(Error::InvalidArgument(format!("{name} = {v} is out of range")))
            }
            ElementField::Uniform(_) => Ok(()),
            ElementField::PerElement(vs) => {
                if let Some(n) = num_elements {
                    if vs.len() != n {
                        return Err(Error::Mismatch(format!(
                            "{name} has {} entries but the mesh has {n} elements",
                            vs.len()
                        )));
                    }
                }
                match vs.iter().position(|&v| !ok(v)) {
                    Some(e) => Err(Error::InvalidArgument(format!(
                        "{name} = {} on element {e} is out of range",
                        vs[e]
                    ))),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Host, coolant and surface properties in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Host conductivity, W/m/K.
    pub kappa: ElementField,
    /// Plate thickness, m.
    pub thickness: f64,
    /// Combined convection/radiation coefficient, W/m²/K.
    pub h_t: f64,
    /// Ambient and inlet temperature, K.
    pub theta_amb: f64,
    /// Heater power per unit area, W/m².
    pub source: ElementField,
    /// Coolant density, kg/m³.
    pub rho_f: f64,
    /// Coolant specific heat, J/kg/K.
    pub c_f: f64,
    /// Volumetric flow rate, m³/s.
    pub flow_rate: f64,
}

impl PhysicalParams {
    /// Reference plate, coolant and heater values for the given host, with
    /// the flow rate in mL/min.
    pub fn reference(material: Material, flow_ml_min: f64) -> Self {
        Self {
            kappa: ElementField::Uniform(material.conductivity()),
            thickness: 0.005,
            h_t: 21.0,
            theta_amb: 295.15,
            source: ElementField::Uniform(1000.0),
            rho_f: 1000.0,
            c_f: 4183.0,
            flow_rate: ml_min_to_m3s(flow_ml_min),
        }
    }

    pub fn heat_capacity_rate(&self) -> f64 {
        heat_capacity_rate(self)
    }

    /// Uniform heater power f₀, if the source is uniform.
    pub fn uniform_source(&self) -> Option<f64> {
        self.source.as_uniform()
    }

    pub fn with_flow_rate(&self, flow_rate: f64) -> Self {
        Self {
            flow_rate,
            ..self.clone()
        }
    }

    pub fn with_kappa(&self, kappa: ElementField) -> Self {
        Self {
            kappa,
            ..self.clone()
        }
    }

    /// Checks the physical invariants; `num_elements` also checks the
    /// lengths of per-element fields.
    pub fn validate(&self, num_elements: Option<usize>) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let scalar = |name: &str, v: f64, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} = {v} is out of range")))
            }
        };
        self.kappa.check("kappa", num_elements, positive)?;
        self.source
            .check("source", num_elements, |v| v.is_finite() && v >= 0.0)?;
        scalar("thickness", self.thickness, positive(self.thickness))?;
        scalar("h_t", self.h_t, positive(self.h_t))?;
        scalar("rho_f", self.rho_f, positive(self.rho_f))?;
        scalar("c_f", self.c_f, positive(self.c_f))?;
        scalar("theta_amb", self.theta_amb, positive(self.theta_amb))?;
        scalar(
            "flow_rate",
            self.flow_rate,
            self.flow_rate.is_finite() && self.flow_rate >= 0.0,
        )
    }
}

/// χ = ρ_f Q c_f, in W/K.
pub fn heat_capacity_rate(params: &PhysicalParams) -> f64 {
    params.rho_f * params.flow_rate * params.c_f
}

/// Host materials with tabulated conductivities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Material {
    Gfrp,
    Cfrp,
    In718,
}

impl Material {
    pub const ALL: [Material; 3] = [Material::Gfrp, Material::Cfrp, Material::In718];

    /// Conductivity in W/m/K.
    pub fn conductivity(self) -> f64 {
        match self {
            Material::Gfrp => 0.6360,
            Material::Cfrp => 3.2110,
            Material::In718 => 11.2,
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Material::Gfrp => "GFRP",
            Material::Cfrp => "CFRP",
            Material::In718 => "In718",
        })
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gfrp" => Ok(Material::Gfrp),
            "cfrp" => Ok(Material::Cfrp),
            "in718" | "inconel" => Ok(Material::In718),
            _ => Err(Error::InvalidArgument(format!(
                "unknown material `{s}` (expected GFRP, CFRP or In718)"
            ))),
        }
    }
}
