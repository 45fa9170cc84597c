use thiserror::Error;

use crate::weight::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain is empty: no quadrature node satisfies rho < 0")]
    EmptyDomain,

    #[error("domain leaks outside its bounding box at {point}")]
    DomainOutsideBox { point: String },

    #[error("non-finite integrand value at node {index}")]
    NonFiniteIntegrand { index: usize },

    #[error("degenerate Gram matrix{context}: every eigenvalue is below the floor")]
    DegenerateGram { context: String },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("constraints are rank deficient (smallest pivot ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("constraints are infeasible (residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("kernel evaluation failed at {point}: {reason}")]
    KernelEvaluation { point: String, reason: String },

    #[error("finite-difference stencil at t = {t} hit a floored Gram matrix")]
    StencilFloored { t: String },

    #[error("optimizer did not converge (best value so far {best:e})")]
    NonConvergence { best: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
