//! Lebesgue–Stieltjes integration with respect to increasing functions, with
//! exact generalized inverses and the change-of-variables rule for
//! `∫ f d(N ∘ M)` when `M` has flats and `N` jumps on them.
//!
//! All arithmetic is exact over the rationals ([`Scalar`]); `f64` appears
//! only at the edges ([`scalar::from_f64`], [`scalar::to_f64`]) and in the
//! independent brute-force [`oracle`].

pub mod batch;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod integrand;
pub mod measure;
pub mod monotone;
pub mod oracle;
pub mod random;
pub mod scalar;
pub mod substitution;

pub use batch::{verify_batch, Instance};
pub use error::{Error, Result};
pub use exec::Execution;
pub use integrand::{integrate, Monotonicity, PiecewiseFn, Poly};
pub use measure::{measure_from, pushforward_mass, Atom, DensityPiece, Interval, LSMeasure};
pub use monotone::{Breakpoint, FlatLevel, FlatLevels, MonotoneFn, Segment, SegmentKind, Side};
pub use oracle::{oracle_integrate, OracleConfig, SampleRule};
pub use scalar::Scalar;
pub use substitution::{
    check_inequalities, check_sandwich, decompose, verify_identity, Bound, Decomposition, Identity,
    InverseSide, VerificationReport, VerifyOptions,
};
