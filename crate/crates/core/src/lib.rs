//! Scattering of time-harmonic waves by locally perturbed periodic surfaces,
//! solved by a Floquet-Bloch decomposition into quasiperiodic cell problems.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod postproc;
pub mod qpfem;

pub use error::{Error, Result};
