use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("layout error: {0}")]
    Layout(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A numerical precondition (hermiticity, unitarity, ...) failed.
    #[error("{what}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Contract {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its depth limit; the partial sum is kept.
    #[error("quadrature did not converge: partial value {partial}, error estimate {error_estimate:.3e}")]
    Quadrature { partial: f64, error_estimate: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
