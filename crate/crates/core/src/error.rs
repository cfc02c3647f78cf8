//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Result`]. Variants distinguish the
//! caller-fixable problems (dimension/domain mismatches, invalid inputs)
//! from genuine numerical infeasibility (singular Gram matrices, spectra
//! that cannot be realized as a probability table).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by function-space, oracle, learner and estimator code.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had a different length/shape than the space implies.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    /// A coefficient vector or basis lives on the wrong variable (X vs Z).
    #[error("domain mismatch in {context}: expected {expected}, got {got}")]
    DomainMismatch {
        context: String,
        expected: &'static str,
        got: &'static str,
    },

    /// A point was evaluated outside the finite support of an indicator
    /// basis or a weight table.
    #[error("point {value} is outside the finite support ({context})")]
    PointOutsideSupport { context: String, value: f64 },

    /// A basis specification violates its structural invariants.
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    /// A joint probability table violates its structural invariants.
    #[error("invalid joint pmf: {0}")]
    InvalidPmf(String),

    /// A population Gram matrix is singular: some basis direction carries no
    /// probability mass. The offending directions must be pruned.
    #[error(
        "singular population Gram in {context}: basis direction(s) {directions:?} carry no \
         probability mass; prune the support or drop those basis functions"
    )]
    SingularPopulationGram {
        context: String,
        directions: Vec<usize>,
    },

    /// An empirical normal-equation system is numerically singular even
    /// after the stabilizing ridge.
    #[error(
        "singular linear system in {context} (reciprocal condition estimate {rcond:.3e}); \
         the sample does not identify the coefficients"
    )]
    SingularSystem { context: String, rcond: f64 },

    /// A matrix that must be symmetric positive semidefinite is not.
    #[error(
        "matrix in {context} is not positive semidefinite \
         (minimum eigenvalue {min_eigenvalue:.3e})"
    )]
    NotPositiveSemidefinite {
        context: String,
        min_eigenvalue: f64,
    },

    /// A ridge/Tikhonov penalty outside (0, inf).
    #[error("invalid regularization parameter {value}: must be finite and > 0")]
    InvalidLambda { value: f64 },

    /// Too few observations for the requested operation.
    #[error("{context} needs at least {min} observations, got {n}")]
    TooFewSamples {
        context: String,
        n: usize,
        min: usize,
    },

    /// The projected fixed-point loop could not realize the requested
    /// singular spectrum as a nonnegative probability table.
    #[error(
        "spectrum not realizable after {iterations} iterations: \
         worst relative deviation {worst_rel_dev:.3e} (target {targets:?})"
    )]
    SpectrumNotRealized {
        iterations: usize,
        worst_rel_dev: f64,
        targets: Vec<f64>,
    },

    /// A structurally infeasible data-generating design.
    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    /// A configuration value that fails validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical routine failed in {context}: {detail}")]
    Numerical { context: String, detail: String },

    /// A nuisance fit failed inside the estimator; annotates which
    /// role-rotation and which nuisance was being fit.
    #[error("{role} fit failed in rotation {rotation}: {source}")]
    FoldFit {
        rotation: usize,
        role: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Convenience constructor for [`Error::DimensionMismatch`].
    pub(crate) fn dim(context: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            got,
        }
    }
}
