//! Heisenberg-group spacetimes: the 2-step nilpotent group law in exponential
//! coordinates, paths of automorphisms that define Lorentzian metrics on
//! `R x H`, isometry verification, and lattice quotients.
//!
//! Everything is organized around a handful of small modules:
//!
//! * [`lie_core`] - the Heisenberg algebra, its warped extension, and exact
//!   group arithmetic (generic over `f64` or exact rationals).
//! * [`symplectic`] - central splittings, the induced symplectic form, and
//!   definiteness tests for candidate derivations.
//! * [`paths`] - paths of automorphisms, their logarithmic derivatives,
//!   validation, rescaling, complement changes, and equivalence checks.
//! * [`geometry`] - the group action on `R x H`, Killing fields, metric
//!   assembly, isometry verification, and the light-like rigidity solver.
//! * [`quotient`] - lattices, deck transformations, and quotient checks in
//!   exact rational arithmetic.
//! * [`examples`] - the built-in model constructions (homogeneous, bump
//!   deformation, hyperbolic monodromy) and their cross-checks.
//! * [`cli`] - configuration, JSON reports, and CSV emission for the
//!   `heislorentz` binary.
//!
//! # Example
//!
//! Sample the metric of the rank-2 homogeneous model with rotation rates
//! `(1, 1/2)` and confirm its Lorentzian signature:
//!
//! ```
//! # fn main() -> Result<(), heislorentz::Error> {
//! use heislorentz::examples::homogeneous_path;
//! use heislorentz::geometry::{metric_at, signature_of, SpacetimePoint};
//! use heislorentz::lie_core::AlgebraVector;
//! use heislorentz::rational::rat_i64;
//! use heislorentz::symplectic::Splitting;
//!
//! let path = homogeneous_path(2, &[rat_i64(1, 1), rat_i64(1, 2)])?;
//! let splitting = Splitting::standard(2);
//! let point = SpacetimePoint::new(1.0, AlgebraVector::zero(2));
//! let sample = metric_at(&path, &splitting, &point)?;
//! assert_eq!(signature_of(&sample.gram)?, (1, 5));
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod examples;
pub mod geometry;
pub mod lie_core;
pub mod numeric;
pub mod paths;
pub mod quotient;
pub mod rational;
pub mod symplectic;

/// Library version stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Convention stamp recorded in reports so numbers can be reproduced later.
///
/// `C_s` is the automorphism of the Heisenberg algebra with derivative
/// `s |-> ad_exp_tW(s)`; the warped group law is
/// `(t1,h1)(t2,h2) = (t1+t2, C_{-t2}(h1) h2)`; signatures are reported as
/// `(timelike, spacelike)` eigenvalue counts.
pub const CONVENTION: &str = "C_s=exp(s ad W); (t1,h1)(t2,h2)=(t1+t2,C_{-t2}(h1)h2); signature=(timelike,spacelike)";

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular map: {0}")]
    Singular(String),
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
    #[error("complement not preserved: {0}")]
    ComplementNotPreserved(String),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("degenerate form: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("invalid config at {pointer}: {message}")]
    Config { pointer: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Config error with a JSON-pointer path to the offending field.
    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { pointer: pointer.into(), message: message.into() }
    }
}
