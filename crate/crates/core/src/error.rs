use thiserror::Error;

/// Errors raised by the loaders, validators and numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("missing J values {missing:?} for helicity pair (Ω'={omega_prime}, Ω={omega})")]
    MissingJ {
        omega_prime: i32,
        omega: i32,
        missing: Vec<u32>,
    },

    #[error("phase undefined at J={j}: |S| = {magnitude:e}")]
    UndefinedPhase { j: u32, magnitude: f64 },

    #[error("half-turn phase jump between J={} and J={j} (Δarg = {delta})", j - 1)]
    UnwrapTie { j: u32, delta: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::UndefinedPhase { .. } | Error::UnwrapTie { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
