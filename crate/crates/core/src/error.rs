use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector is not a valid cone generator")]
    ZeroGenerator,

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("{0} requires a cone in generator form")]
    NeedsGenerators(&'static str),

    #[error("gradients are linearly dependent (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("point is infeasible: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("vector is not in the interior of the image cone")]
    NotInterior,

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("pseudo-inverse residual {0:e} exceeds tolerance")]
    PseudoInverse(f64),

    #[error("state became non-finite at t = {t}")]
    BlowUp { t: f64 },

    #[error("needle intervals overlap or leave the horizon: {0}")]
    NeedleOverlap(String),

    #[error("no multipliers satisfy the abstract maximum principle conditions")]
    NoMultipliers,

    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
