use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("variable `{0}` already registered with a different tier")]
    TierMismatch(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("polynomial is not quasi-homogeneous")]
    NotQuasiHomogeneous,
    #[error("weights are underdetermined")]
    UnderdeterminedWeights,
    #[error("weights must be strictly positive")]
    InvalidWeights,
    #[error("weight of the zero polynomial is undefined")]
    ZeroPolynomial,
    #[error("weight system must be normalised to total weight 2 (got {0})")]
    NotNormalised(String),
    #[error("potential is not in the square of the maximal ideal")]
    NotInMaximalSquare,
    #[error("singularity is not isolated (Jacobi ring is infinite-dimensional)")]
    NotIsolatedSingularity,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("division is not exact")]
    InexactDivision,
    #[error("variable sets overlap")]
    OverlappingVariables,
    #[error("adjoint requires an even number of y-variables")]
    UnsupportedParity,
    #[error("potentials differ")]
    PotentialMismatch,
    #[error("matrix is not invertible over the polynomial ring")]
    NotInvertible,
    #[error("substitution does not preserve the potential")]
    NotSymmetry,
    #[error("morphism is not closed")]
    NotClosed,
    #[error("factorisation is not graded: {0}")]
    NotGraded(String),
    #[error("central charges differ: {0} vs {1}")]
    ObstructionCentralCharge(String, String),
    #[error("total number of variables is odd")]
    ObstructionParity,
    #[error("quantum dimension keeps a dependence on {0}")]
    ResidualDependence(String),
    #[error("{0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
