//! Distribution-free goodness-of-fit machinery for discrete distributions.
//!
//! The components `Y_i = (ν_i − n p_i)/√(n p_i)` of Pearson's chi-square
//! statistic are asymptotically an orthogonal projection of a standard
//! Gaussian vector parallel to `√p`, so any statistic other than `Σ Y_i²`
//! has a null law that depends on `p`. This crate rotates `Y` with an
//! orthogonal operator that carries `√p` onto a fixed anchor `r`; the
//! rotated vector `Z` has the same chi-square content but a limit law that
//! depends only on `r`. Partial-sum statistics of `Z` are therefore
//! asymptotically distribution free.
//!
//! Modules:
//!
//! * [`rotations`]: unit vectors, the structured orthogonal operators and
//!   the orthonormal bases used for the estimated-parameter case.
//! * [`transforms`]: chi-square components and their rotations for simple,
//!   two-sample and estimated-parameter hypotheses.
//! * [`parametric`]: parametric families, maximum likelihood, Fisher
//!   information and normalized scores.
//! * [`statistics`]: partial sums, discrete Kolmogorov–Smirnov, an
//!   omega-square analogue, Pearson's statistic, null tables and p-values.
//! * [`montecarlo`]: multinomial sampling, the three-model study,
//!   covariance checks and empirical CDFs.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

mod error;
mod linalg;

pub mod anchor;
pub mod model;
pub mod montecarlo;
pub mod parametric;
pub mod rotations;
pub mod special;
pub mod statistics;
pub mod transforms;

pub use anchor::{AnchorPair, AnchorPreset, AnchorTag};
pub use error::{Error, Result, Warning};
pub use model::{fingerprint, DiscreteModel, SampleCounts};
pub use rotations::{BasisMode, GeometryBundle, RotationKind, RotationOp, UnitVector};
pub use transforms::{ComponentKind, ComponentVector, Provenance};
