//! Finite-truncation spectral triples for free actions of compact groups.

pub mod clifford;
pub mod dirac_lift;
pub mod error;
pub mod free_systems;
pub mod groups;
pub mod linalg;
pub mod models;
pub mod report;

pub use error::{Error, Result};
pub use linalg::{CMatrix, HermitianSpectrum, C64};
pub use report::{CheckEntry, VerificationReport};
