//! Sparse matrix storage and the direct solver used by every thermal solve.

mod banded;
mod csr;

pub use banded::{reverse_cuthill_mckee, BandedLu};
pub use csr::CsrMatrix;

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
