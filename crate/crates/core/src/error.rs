use thiserror::Error;

/// Errors raised by the certification and synthesis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("root iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("grid resolution {n} is invalid: need an odd node count of at least 65")]
    BadResolution { n: usize },

    #[error("mask is empty")]
    EmptyMask,

    #[error("not unimodular: certified lower bound {delta_lower:.3e} is not positive")]
    NotUnimodular { delta_lower: f64 },

    #[error("f1 vanishes at a real zero {lambda} of f2 (|f1| = {value:.3e})")]
    ZeroOnZero { lambda: f64, value: f64 },

    #[error("f1 is not POZ of f2: values {values:?} at the real zeros of f2 change sign")]
    PozViolation { values: Vec<f64> },

    #[error("polynomials are not coprime (gcd degree {gcd_degree})")]
    NotCoprime { gcd_degree: usize },

    #[error("level sets cannot be separated above delta' = {floor:.3e}; refine the grid")]
    ResolutionTooCoarse { floor: f64 },

    #[error("component {component} of E1 cannot reach the boundary without meeting E2")]
    NoCorridor { component: usize },

    #[error("S and E2 touch: no room for the cutoff transition")]
    EmptyGap,

    #[error("log branch disagrees by {jump:.3} between traversal paths at node {node}")]
    BranchInconsistency { node: usize, jump: f64 },

    #[error("f1 = {value:.3e} < 0 at real-axis node {node} outside S")]
    NegativeOnAxis { node: usize, value: f64 },

    #[error("|f2| = {value:.3e} is below delta'/2 where the cutoff varies (node {node})")]
    UnboundedK { node: usize, value: f64 },

    #[error("|f1| = {value:.3e} too small for division at node {node} with q != 1")]
    DivisionNearZero { node: usize, value: f64 },

    #[error("g2 formulas disagree by {gap:.3e} across the seam at node {node}")]
    SeamMismatch { node: usize, gap: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Pipeline stage the error was raised in, if known.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// The underlying error with any stage wrapper removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
