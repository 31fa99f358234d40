use std::fmt;

use thiserror::Error;

/// Errors produced anywhere in the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponent range violation: {0}")]
    RangeViolation(String),

    #[error("exponent is not smooth on the validation grid: {0}")]
    NotSmooth(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("ill-conditioned Volterra step at node {node}: diagonal factor {factor:e}")]
    IllConditioned { node: usize, factor: f64 },

    #[error(
        "invalid initial value u0 = {u0}: with 0 < alpha(t) < 1 on [0,T] the Cauchy problem is \
         well-posed only for u0 = 0 (any c0 != 0 forces |u(0)| = infinity)"
    )]
    InvalidInitialValue { u0: f64 },

    #[error("fit error: {0}")]
    Fit(FitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitError {
    SignChange,
    DegenerateWindow,
    NonDoubling,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::SignChange => f.write_str("values change sign inside the fitting window"),
            FitError::DegenerateWindow => f.write_str("fewer than 4 usable points in the window"),
            FitError::NonDoubling => f.write_str("mesh sizes do not form a doubling sequence"),
        }
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure(_) | Error::IllConditioned { .. } | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
