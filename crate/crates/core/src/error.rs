use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("level {from} does not divide {to}")]
    NotDivisible { from: u32, to: u32 },
    #[error("torsion index (0,0) where a nonzero index is required")]
    ZeroIndex,
    #[error("holomorphic projection undefined for weight {weight}, depth {depth}")]
    UnsupportedWeightDepth { weight: i32, depth: usize },
    #[error("singular matrix")]
    SingularMatrix,
    #[error("total degree {0} exceeds the truncation")]
    DegreeOverflow(u32),
    #[error("entry ({0},{1}) still has nonholomorphic parts")]
    DepthNonzero(u32, u32),
    #[error("polynomial division left a nonzero remainder")]
    NonzeroRemainder,
    #[error("coset enumeration needs {0} residues, above the bound {1}")]
    IndexOverflow(u64, u64),
    #[error("precision {have} below the required {need}")]
    InsufficientPrecision { have: usize, need: usize },
    #[error("inconsistent linear system: {0}")]
    InconsistentSystem(String),
    #[error("Manin relation violated at {0}")]
    RelationViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("I/O failure: {0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
