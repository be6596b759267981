use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atom index {index} out of range for an algebra with {n_atoms} atoms")]
    AtomOutOfRange { index: usize, n_atoms: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("enumeration over {size} elements exceeds the cap of {cap}")]
    EnumerationCap { size: usize, cap: usize },

    #[error("measure vanishes identically on the given set")]
    VanishingMeasure,

    #[error("vectors {i} and {j} are not orthogonal (|<v_i, v_j>| = {inner:e})")]
    NotOrthogonal { i: usize, j: usize, inner: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositive { eigenvalue: f64 },

    #[error("operator is not hermitian (|H - H*| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("real Hadamard variant needs a power-of-two dimension, got {0}")]
    NotPowerOfTwo(usize),

    #[error("block {block} needs dimension at least {required}, got {actual}")]
    BlockTooSmall {
        block: usize,
        required: usize,
        actual: usize,
    },

    #[error("block {block} needs dimension {required}, above the cap of {cap}")]
    BlockTooLarge {
        block: usize,
        required: usize,
        cap: usize,
    },

    #[error("empty vector family")]
    EmptyFamily,

    #[error("coefficients must be real")]
    ComplexCoefficients,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
