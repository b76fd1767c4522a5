use thiserror::Error;

/// Failure modes shared across the recovery and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A factorization hit a pivot below the singularity threshold, or a
    /// solve produced no result.
    #[error("matrix is numerically singular")]
    SingularMatrix,

    /// Interpolation geometry is degenerate: the enrichment direction is
    /// (numerically) parallel to one of the sample displacements, or sample
    /// generation could not avoid that after bounded retries.
    #[error("degenerate interpolation geometry: {0}")]
    DegenerateGeometry(String),

    /// The descent safeguard needs a nonzero gradient to define an angle.
    #[error("gradient is zero; no descent direction to safeguard")]
    ZeroGradient,

    /// The line search was handed a direction with ∇f(x)ᵀd ≥ 0.
    #[error("line search requires a descent direction (got slope {0:.3e})")]
    AscentDirection(f64),

    /// Dimensions of the supplied operands do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An operation received an empty input it cannot act on.
    #[error("empty input: {0}")]
    EmptyInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
