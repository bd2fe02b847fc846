use thiserror::Error;

use crate::polynomial::MultiIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {idx} lies outside the degree box {bx}")]
    IndexOutOfBox { idx: MultiIndex, bx: String },

    #[error("polynomial not real-valued")]
    NotRealValued,

    #[error("not nonnegative: minimum {min:.3e} on the sampling grid")]
    NotNonnegative { min: f64 },

    #[error("phi table incomplete, missing indices: {0:?}")]
    IncompleteTable(Vec<MultiIndex>),

    #[error("phi table is not Hermitian-symmetric at {0}")]
    NotHermitianSymmetric(MultiIndex),

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("phi not Hermitian positive, no supported hyperplane: min eigenvalue {min_eig:.3e}")]
    NotHermitianPositive { min_eig: f64 },

    #[error("degree box mismatch: {0}")]
    BoxMismatch(String),

    #[error("vector length {got} does not match box size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid resolution must be at least 2, got {0}")]
    BadResolution(usize),

    #[error("zero polynomial has no proportionality ratio")]
    ZeroPolynomial,

    #[error("inconsistent certificate: {0}")]
    InconsistentCertificate(String),

    #[error("empty measure")]
    EmptyMeasure,

    #[error("invalid measure atom: {0}")]
    InvalidAtom(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
