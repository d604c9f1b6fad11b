use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank-deficient parametrization on chart {chart} at {coords:?} (singular value ratio {ratio:e})")]
    RankDeficient { chart: usize, coords: Vec<f64>, ratio: f64 },
    #[error("vector is not tangent to the manifold (normal residual {residual:e})")]
    NotTangent { residual: f64 },
    #[error("manifold is not an oriented planar domain boundary")]
    NotPlanarBoundary,
    #[error("degenerate chord: endpoint distance {length:e}")]
    DegenerateChord { length: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid manifold: {0}")]
    InvalidModel(String),
    #[error("invalid chart point: {0}")]
    InvalidPoint(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("too few trajectory samples: need at least {needed}, found {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("trajectory samples are not uniformly spaced in time")]
    NonUniformSamples,
    #[error("sweep plan excludes every chord pair")]
    EmptyPlan,
    #[error("step rejected at t = {t} after {halvings} halvings: {reason}")]
    StepRejected { t: f64, halvings: usize, reason: String },
}
