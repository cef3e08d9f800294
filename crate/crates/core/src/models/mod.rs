//! Builders for the worked examples.

pub mod crossed_product;
pub mod homogeneous;
pub mod quantum_torus;
