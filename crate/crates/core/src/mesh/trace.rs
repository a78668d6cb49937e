//! Two-sided traces across an interior curve and the symmetric jump and
//! average operators acting on them.
//!
//! The jump of a scalar is a vector, `⟦α⟧ = α⁺n̂⁺ + α⁻n̂⁻`, and the jump of a
//! vector is a scalar, `⟦a⟧ = a⁺·n̂⁺ + a⁻·n̂⁻`. Both are symmetric in the
//! `+`/`-` labels.

use super::{dot, norm, sub, Point};
use crate::error::{Error, Result};

const NORMAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SidedTrace<T> {
    plus: T,
    minus: T,
    plus_normal: Point,
    minus_normal: Point,
}

impl<T: Copy> SidedTrace<T> {
    pub fn new(plus: T, minus: T, plus_normal: Point, minus_normal: Point) -> Result<Self> {
        for (name, n) in [("plus", plus_normal), ("minus", minus_normal)] {
            if (norm(n) - 1.0).abs() > NORMAL_TOL {
                return Err(Error::TraceInvariant(format!(
                    "{name} normal {n:?} is not unit length"
                )));
            }
        }
        let sum = [plus_normal[0] + minus_normal[0], plus_normal[1] + minus_normal[1]];
        if norm(sum) > NORMAL_TOL {
            return Err(Error::TraceInvariant(format!(
                "normals {plus_normal:?} and {minus_normal:?} are not opposite"
            )));
        }
        Ok(Self {
            plus,
            minus,
            plus_normal,
            minus_normal,
        })
    }

    /// Trace across the segment `a -> b`; the `+` side lies to the left.
    pub fn across_edge(a: Point, b: Point, plus: T, minus: T) -> Result<Self> {
        let t = sub(b, a);
        let len = norm(t);
        if len == 0.0 {
            return Err(Error::TraceInvariant("zero-length edge".into()));
        }
        let left = [-t[1] / len, t[0] / len];
        let trace = Self::new(plus, minus, [-left[0], -left[1]], left)?;
        debug_assert!(dot(trace.plus_normal, t).abs() <= NORMAL_TOL * len);
        Ok(trace)
    }

    pub fn plus(&self) -> T {
        self.plus
    }

    pub fn minus(&self) -> T {
        self.minus
    }

    pub fn plus_normal(&self) -> Point {
        self.plus_normal
    }

    pub fn minus_normal(&self) -> Point {
        self.minus_normal
    }

    /// Same trace with the `+` and `-` labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            plus: self.minus,
            minus: self.plus,
            plus_normal: self.minus_normal,
            minus_normal: self.plus_normal,
        }
    }

    /// Combines two traces on the same edge side by side.
    pub fn zip_with<U: Copy, V: Copy>(
        &self,
        other: &SidedTrace<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<SidedTrace<V>> {
        if self.plus_normal != other.plus_normal || self.minus_normal != other.minus_normal {
            return Err(Error::TraceInvariant("traces live on different edges".into()));
        }
        Ok(SidedTrace {
            plus: f(self.plus, other.plus),
            minus: f(self.minus, other.minus),
            plus_normal: self.plus_normal,
            minus_normal: self.minus_normal,
        })
    }

    /// Checks that both normals are orthogonal to `tangent`.
    pub fn is_normal_to(&self, tangent: Point) -> bool {
        let scale = norm(tangent);
        dot(self.plus_normal, tangent).abs() <= NORMAL_TOL * scale
            && dot(self.minus_normal, tangent).abs() <= NORMAL_TOL * scale
    }
}

pub fn jump_scalar(trace: &SidedTrace<f64>) -> Point {
    let (p, m) = (trace.plus, trace.minus);
    [
        p * trace.plus_normal[0] + m * trace.minus_normal[0],
        p * trace.plus_normal[1] + m * trace.minus_normal[1],
    ]
}

pub fn avg_scalar(trace: &SidedTrace<f64>) -> f64 {
    0.5 * (trace.plus + trace.minus)
}

pub fn jump_vector(trace: &SidedTrace<Point>) -> f64 {
    dot(trace.plus, trace.plus_normal) + dot(trace.minus, trace.minus_normal)
}

pub fn avg_vector(trace: &SidedTrace<Point>) -> Point {
    [
        0.5 * (trace.plus[0] + trace.minus[0]),
        0.5 * (trace.plus[1] + trace.minus[1]),
    ]
}
