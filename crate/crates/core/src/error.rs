use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("off-diagonal coefficient must be positive, got {0}")]
    NonPositiveOffDiagonal(f64),

    #[error("operation requires Im(z) > 0, got Im(z) = {0}")]
    RequiresUpperHalfPlane(f64),

    #[error("imaginary part must be nonnegative, got {0}")]
    NegativeImaginary(f64),

    #[error("energy {energy} coincides with an eigenvalue {atom} on the real axis")]
    Singularity { energy: f64, atom: f64 },

    #[error("continued fraction did not converge at depth {depth} (last increment {increment:e}); best value {best_re} + {best_im}i")]
    NonConvergence {
        best_re: f64,
        best_im: f64,
        depth: usize,
        increment: f64,
    },

    #[error("coefficient bound violated at n = {index}: {detail}")]
    BoundViolation { index: i64, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid descriptor `{input}`: {reason}")]
    Descriptor { input: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn descriptor(input: &str, reason: impl Into<String>) -> Self {
        Error::Descriptor {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
