use thiserror::Error;

/// Errors raised by operator construction, evolution and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("operator is not Hermitian: max |H - H^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(
        "Fock truncation insufficient: tail population {max_tail:e} exceeds {limit:e} at t = {time}; \
         try a cavity cutoff of at least {suggested_cutoff}"
    )]
    Truncation {
        max_tail: f64,
        limit: f64,
        time: f64,
        suggested_cutoff: usize,
    },

    #[error("step size underflow at t = {time} (h = {step:e}); the problem is too stiff for the explicit integrator")]
    Stiffness { time: f64, step: f64 },

    #[error("state validation failed: {0}")]
    Validation(String),

    #[error("dimension {dim} exceeds the oracle guard of {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("logic error: {0}")]
    Logic(&'static str),

    #[error("trace has {len} samples; at least {min} are required")]
    TraceTooShort { len: usize, min: usize },

    #[error("disorder realization {index} (delta_A = {delta_a}, delta_B = {delta_b}) failed: {source}")]
    Realization {
        index: usize,
        delta_a: f64,
        delta_b: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
