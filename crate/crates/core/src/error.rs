use thiserror::Error;

/// Errors raised by the observer, synthesis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quaternion norm {norm} deviates from 1 by more than {tolerance:e}")]
    NonUnitQuaternion { norm: f64, tolerance: f64 },

    #[error("matrix is not a rotation (orthogonality residual {orthogonality:e}, det {det})")]
    NotARotation { orthogonality: f64, det: f64 },

    #[error("{what} is not skew-symmetric (residual {residual:e})")]
    NotSkew { what: &'static str, residual: f64 },

    #[error("{what} is not symmetric (residual {residual:e})")]
    NotSymmetric { what: &'static str, residual: f64 },

    #[error("{what} is singular")]
    Singular { what: &'static str },

    #[error("pole {re} + {im}i is not strictly stable")]
    UnstablePole { re: f64, im: f64 },

    #[error("complex poles must come in conjugate pairs")]
    NonConjugatePoles,

    #[error("gain {name} must be positive and finite, got {value}")]
    InvalidGain { name: &'static str, value: f64 },

    #[error("gains (k1, k2, k3) = ({k1}, {k2}, {k3}) do not give a Hurwitz polynomial")]
    NotHurwitz { k1: f64, k2: f64, k3: f64 },

    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
