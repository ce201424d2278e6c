//! Dirichlet series attached to base-b digit sums.

pub mod beta_series;
pub mod delange;
pub mod digits;
pub mod error;
pub mod integer_base;
pub mod numerics;
pub mod parallel;
pub mod poles;
pub mod special;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use special::{ComplexPoint, Estimate, PrecisionProfile};
