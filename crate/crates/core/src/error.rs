use alloc::{string::String, vec::Vec};
use core::fmt;

/// Hypotheses of the existence theory that the pipeline can find violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hypothesis {
    /// Zero set of the weight is a finite union of closed hypersurfaces inside the domain.
    A1,
    /// Weight is a Muckenhoupt A2 weight and `1/a` lies in `L^t` for some `t > N/2`.
    A2,
    /// Strict local minimum of `f` at zero and a first positive zero `s_star`.
    F1,
    /// Slope of `f` at zero dominates `max a * lambda_1` on every component.
    F2,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::A1 => "a1",
            Hypothesis::A2 => "a2",
            Hypothesis::F1 => "f1",
            Hypothesis::F2 => "f2",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.label())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("resolution too coarse: no interior node at n = {n}")]
    ResolutionTooCoarse { n: usize },

    #[error("invalid weight value {value} at {point:?}")]
    InvalidWeight { point: Vec<f64>, value: f64 },

    #[error("invalid nonlinearity, {hypothesis} fails: {detail}")]
    InvalidNonlinearity { hypothesis: Hypothesis, detail: String },

    #[error("hypothesis {hypothesis} violated: {detail}")]
    HypothesisViolation { hypothesis: Hypothesis, detail: String },

    #[error("no component left after removing the zero set")]
    EmptyDecomposition,

    #[error("seed failure on component {component}: J(s e1) >= 0 down to s = {smallest_scale:e}")]
    SeedFailure { component: String, smallest_scale: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no converged bump for component {0}")]
    MissingBump(String),

    #[error("empty subset: the trivial solution is not enumerated")]
    EmptySubset,

    #[error("refusing to enumerate 2^{chi} - 1 subsets (limit chi <= {limit})")]
    TooManyComponents { chi: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl Error {
    /// Hypothesis named by this error, if it is a hypothesis violation.
    pub fn hypothesis(&self) -> Option<Hypothesis> {
        match self {
            Error::HypothesisViolation { hypothesis, .. } | Error::InvalidNonlinearity { hypothesis, .. } => {
                Some(*hypothesis)
            }
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
