//! Numerical toolkit for the fractional relativistic Schrödinger operator
//! (-Δ+m²)^s - a(x/|x|)|x|^{-2s} - h(x) and its degenerate extension.

pub mod error;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub mod params;
pub mod tridiag;

pub use params::{AKind, HKind, Params, PotentialSpec};
pub mod angular;
pub mod diagnostics;
pub mod extension;
pub mod halfdisk;
pub mod hardy;
pub mod linalg;
