//! Reduced-order thermal model of thin plates cooled by an embedded channel,
//! with adjoint sensitivities of the mean surface temperature.

pub mod case;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod qoi;
pub mod sensitivity;
pub mod solver;
pub mod vasculature;

pub use error::{Error, Result};
