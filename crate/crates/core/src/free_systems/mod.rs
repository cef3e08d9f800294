//! Free C*-dynamical systems at truncation scale.

pub mod base;
pub mod covariant;
pub mod element;
pub mod factor;
pub mod total;

pub use base::RepresentedBase;
pub use covariant::{classify_covariant_reps, BlockOp, Classification, CovariantRep, HpBlock};
pub use element::AlgebraElement;
pub use factor::{CocycleSource, FactorSystem};
pub use total::{check_freeness, ActionFn, FreenessReport, Monomial, TotalOp, TotalSystem};
