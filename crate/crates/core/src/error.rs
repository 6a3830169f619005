use thiserror::Error;

/// Errors raised by the numerical integration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("integrand is not finite at ({xi2}, {xi3})")]
    NonFinite { xi2: f64, xi3: f64 },

    /// Refinement cap reached. The best available estimate is kept so callers
    /// can still report it.
    #[error(
        "no convergence after {levels} refinement levels \
         (estimate {value_re}{value_im:+}j, error estimate {error_estimate:e})"
    )]
    NotConverged {
        value_re: f64,
        value_im: f64,
        error_estimate: f64,
        levels: u32,
    },
}

/// Errors raised by the model, array and estimation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("antenna index {m} outside [-{half_size}, {half_size}]")]
    AntennaOutOfRange { m: i32, half_size: u32 },

    #[error("sheet coordinate ({xi2}, {xi3}) outside [-{a_y}, {a_y}] x [-{a_z}, {a_z}]")]
    OutsideSheet { xi2: f64, xi3: f64, a_y: f64, a_z: f64 },

    #[error(
        "{path} path to antenna {m} is {distance} m, below one wavelength ({wavelength} m); \
         the diffraction model does not hold this close to the sheet"
    )]
    Singularity {
        path: &'static str,
        m: i32,
        distance: f64,
        wavelength: f64,
    },

    #[error("field ratio is zero: attenuation is infinite")]
    InfiniteAttenuation,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("occupied state requires a target sheet")]
    MissingTarget,

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl ModelError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// `true` for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ModelError::Quadrature(_) | ModelError::Singularity { .. } | ModelError::InfiniteAttenuation
        )
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
