//! Exact verification of the canonical filtration of `F^*(F_*W)` and of the
//! slope inequalities behind the stability of Frobenius direct images.
//!
//! All local objects are modelled on the fiber at a closed point, where the
//! connection has constant integer coefficients, so every check reduces to
//! linear algebra over `F_p`. Slope arithmetic is done in exact rationals.

pub mod caps;
pub mod cli;
pub mod error;
pub mod filtration;
pub mod gfp;
pub mod linalg;
pub mod local_algebra;
pub mod report;
pub mod slope;
pub mod tensor_rep;

pub use caps::Caps;
pub use error::{Error, Result};
pub use gfp::{ExactRational, FieldScalar, PrimeChar};
pub use linalg::{Matrix, SubspaceBasis};
pub use report::{Clause, Status, VerificationReport};
