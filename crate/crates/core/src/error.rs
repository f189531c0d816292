use thiserror::Error;

use crate::coeff::{CoeffFn, C64};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty coefficient list")]
    Empty,

    #[error("non-finite coefficient at degree {deg}, component {component}")]
    NonFinite { deg: usize, component: usize },

    #[error("truncation overflow: degree {deg} does not fit ambient degree {ambient}")]
    TruncationOverflow { deg: usize, ambient: usize },

    #[error("point {z} lies outside the closed unit disc")]
    Domain { z: C64 },

    #[error("Blaschke zero {zero} is not inside the open unit disc")]
    ZeroOutsideDisc { zero: C64 },

    #[error("monomial degree {k} exceeds truncation degree {deg}")]
    MonomialDegree { k: usize, deg: usize },

    #[error("symbol is not inner: deviation {deviation:.3e} exceeds {allowed:.3e}")]
    NotInner { deviation: f64, allowed: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// `S*F_{k+1}` escaped `M ⊕ 𝓕` during a decomposition step.
    #[error("NOT-NEARLY-INVARIANT: step {step} left M ⊕ F with residual {residual:.6e}")]
    NotNearlyInvariant {
        step: usize,
        residual: f64,
        remainder: CoeffFn,
    },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures that mean "the mathematics said no" rather than bad input.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::NotNearlyInvariant { .. }
                | Error::NotInner { .. }
                | Error::Certification(_)
                | Error::InvariantViolation(_)
        )
    }
}
