//! Thermodynamic potentials as twice-differentiable scalar fields, the
//! convexity-preserving transformations between them, and numerical
//! certification of convexity and Hessian definiteness.

pub mod convexity;
pub mod eos;
pub mod euler;
pub mod error;
pub mod field;
pub mod linalg;
pub mod solve;
pub mod stability;
pub mod transforms;

pub use error::{Error, Result};
pub use field::{evaluate_jet2, DomainSpec, Jet2, Point, ScalarField};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
