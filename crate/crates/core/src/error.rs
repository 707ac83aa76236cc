use thiserror::Error;

/// Basis and prime indices in messages are 1-based, as in spec files.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structure constants are not antisymmetric at ({0},{1},{2})")]
    Antisymmetry(usize, usize, usize),
    #[error("Jacobi identity fails for basis triple ({0},{1},{2})")]
    JacobiViolation(usize, usize, usize),
    #[error("bracket [X{0},X{1}] leaves the filtration at component X{2}")]
    FiltrationViolation(usize, usize, usize),
    #[error("structure constant c({0},{1},{2}) exceeds the declared height")]
    HeightExceeded(usize, usize, usize),
    #[error("trailing span is not an ideal: [X{0},X{1}] has an X{2} component")]
    IdealViolation(usize, usize, usize),
    #[error("nilpotency class exceeds {0} or the algebra is not nilpotent")]
    ClassTooLarge(usize),
    #[error("integer coordinates are not closed under the group law, so the basis is not a Mal'cev basis for Γ = ℤ^m")]
    NotALattice,
    #[error("family tag does not match the structure constants: {0}")]
    FamilyMismatch(String),
    #[error("invalid nilmanifold spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("test function evaluation failed: {0}")]
    EvaluationDomainError(String),
    #[error("integral not derivable from the grammar: {0}")]
    UnknownIntegral(String),
    #[error("character does not belong to this manifold: {0}")]
    CharacterManifoldMismatch(String),
    #[error("sequence argument {0} exceeds the 2^53 guard")]
    Overflow(i128),
    #[error("coefficient {0} is not in the required filtration subgroup")]
    NotInFiltration(usize),
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("missing prime data for p = {0}")]
    MissingPrimeData(u64),
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("Satake parameter bound violated at p = {p}, j = {j}")]
    BoundViolation { p: u64, j: usize },
    #[error("b = {b} is not coprime to W = {w}")]
    NonCoprime { b: u64, w: u64 },
    #[error("table too short: need {need}, have {have}")]
    TableTooShort { need: u64, have: u64 },
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
