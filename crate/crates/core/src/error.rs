use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("atom {column} has norm {norm}, expected 1")]
    NotUnitNorm { column: usize, norm: f64 },
    #[error("support index {index} out of range for {n} atoms")]
    SupportIndexOutOfRange { index: usize, n: usize },
    #[error("support indices must be strictly increasing")]
    SupportNotSorted,
    #[error("support set is empty")]
    EmptySupport,
    #[error("support of size {k} exceeds ambient dimension {d}")]
    SupportExceedsDimension { k: usize, d: usize },
    #[error("coherence needs at least two atoms (got {n})")]
    CoherenceUndefined { n: usize },
    #[error("babel order {m} exceeds n - 1 = {max}")]
    BabelOrderTooLarge { m: usize, max: usize },
    #[error("beta = {beta} must exceed ||x*||_1 = {x_star_l1}")]
    BetaNotAboveSparseNorm { beta: f64, x_star_l1: f64 },
    #[error("babel value {babel} >= 1: dictionary is not quasi-incoherent at this sparsity")]
    NotQuasiIncoherent { babel: f64 },
    #[error(
        "smallest singular value {sigma_min} is not positive: support atoms are linearly dependent"
    )]
    DegenerateSpectrum { sigma_min: f64 },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("residual is orthogonal to every atom")]
    OrthogonalResidual,
    #[error("dimension {d} is not a power of two")]
    NotPowerOfTwo { d: usize },
    #[error("sparsity {m} exceeds atom count {n}")]
    SparsityTooLarge { m: usize, n: usize },
    #[error("coefficient {index} of the sparse vector is zero")]
    ZeroCoefficient { index: usize },
    #[error("linear system is not positive definite")]
    NotPositiveDefinite,
    #[error("eigenvalue {value} of a Gram matrix is significantly negative")]
    NegativeEigenvalue { value: f64 },
}
