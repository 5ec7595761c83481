//! Crate-wide error type. Variants are signals callers are expected to react
//! to (retry a degenerate draw, reject a bad fit), not just diagnostics.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The affine hull of the input points has dimension below the ambient
    /// dimension. Carries the actual affine dimension so generators can
    /// decide to redraw.
    #[error("input spans only an affine subspace of dimension {dim}")]
    DimensionDeficient { dim: usize },

    /// A lattice transform was requested with a non-unimodular matrix.
    #[error("transform matrix is not unimodular (|det| = {det})")]
    NonUnimodular { det: String },

    /// The lcm of vertex coordinate denominators does not fit in `u64`.
    #[error("polytope denominator exceeds u64")]
    DenominatorOverflow,

    /// A sequence operation needs more terms than were supplied.
    #[error("sequence too short: need at least {needed} terms, got {got}")]
    TooFewTerms { needed: usize, got: usize },

    /// The sequence is not a quasi-polynomial of the stated degree and period.
    #[error("sequence is not a degree-{degree} quasi-polynomial of period {period}")]
    NotQuasiPolynomial { degree: usize, period: u64 },

    /// Numerator extraction did not terminate: coefficient at `index` should
    /// vanish but does not, signalling a wrong (degree, period) pair.
    #[error("delta extraction does not terminate: nonzero coefficient at index {index}")]
    NonTerminatingDelta { index: usize },

    /// A count of zero cannot be mapped through the natural logarithm.
    #[error("cannot take log of zero count at index {index}")]
    ZeroCount { index: usize },

    /// Polar duality requires the origin strictly inside the polytope.
    #[error("origin is not strictly interior")]
    OriginNotInterior,

    /// An operation requiring a Fano polytope was given something else.
    #[error("polytope is not Fano")]
    NotFano,

    /// Weighted-projective weights must be positive and pairwise coprime.
    #[error("bad weights ({w0}, {w1}, {w2}): must be positive and pairwise coprime")]
    BadWeights { w0: u64, w1: u64, w2: u64 },

    /// A rejection-sampling loop hit its retry cap.
    #[error("retry limit of {cap} exceeded while generating a datapoint")]
    RetryLimit { cap: u32 },

    /// A dataset file does not match the expected schema.
    #[error("dataset schema error at line {line}: {msg}")]
    Schema { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Stratified splitting needs at least two members per stratum.
    #[error("stratum {stratum:?} has fewer than 2 members")]
    TooFewSamples { stratum: String },

    /// An iterative numerical routine failed to converge.
    #[error("{what} did not converge")]
    NoConvergence { what: String },

    /// Parameter validation failure (empty dimension list, bad fractions, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}
