//! Martingale optimal transport between finitely supported measures on the
//! real line.
//!
//! Everything is generic over [`Scalar`]: `f64` with tolerances, or exact
//! [`Rational`] arithmetic.

pub mod costs;
pub mod curtain;
pub mod error;
pub mod io;
pub mod lp;
pub mod measures;
pub mod random;
pub mod scalar;
pub mod shadow;
pub mod tolerance;
pub mod variation;

pub use error::{MotError, Result};
pub use measures::{Atom, DiscreteMeasure};
pub use scalar::{Rational, Scalar};
pub use tolerance::Tolerances;
