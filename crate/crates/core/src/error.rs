use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin label: {0}")]
    InvalidSpin(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),
    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("invalid tensor index K={k}, Q={q} for 2j={twice_j}")]
    InvalidTensorIndex { k: u32, q: i32, twice_j: u32 },
    #[error("invalid angular momentum labels: {0}")]
    InvalidAngularMomentum(String),
    #[error("coefficients violate the Hermiticity image (residual {0:.3e})")]
    HermiticityImage(f64),
    #[error("truncated P-function has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),
    #[error("state coincides with the maximally mixed state")]
    ZeroDirection,
    #[error("interpolation parameter {0} outside [0, 1]")]
    BadInterpolation(f64),
    #[error("dictionary size {got} below the Caratheodory bound {need}")]
    DictionaryTooSmall { got: usize, need: usize },
    #[error("bad eigenvalue input: {0}")]
    BadEigenvalues(String),
    #[error("linear program did not converge after {0} iterations")]
    SolverStalled(usize),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
