use thiserror::Error;

/// Failures raised by the estimation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency vector must hold at least one entry")]
    EmptyFrequencies,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("snapshot must hold at least 2 samples, got {0}")]
    SnapshotTooShort(usize),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("signal energy is zero; SNR is undefined")]
    ZeroSignal,

    #[error("ill-conditioned manifold: singular value ratio {ratio:e} below threshold")]
    IllConditionedManifold { ratio: f64 },

    #[error("sparsity {sparsity} violates the bound L <= N - 1 for N = {samples}")]
    SparsityBound { sparsity: usize, samples: usize },

    #[error("OMP selected atom {atom} twice; residual is degenerate")]
    DegenerateResidual { atom: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),

    #[error("Fisher information matrix is singular")]
    SingularFisher,
}

pub type Result<T> = core::result::Result<T, Error>;
