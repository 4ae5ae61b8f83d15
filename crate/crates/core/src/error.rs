use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("material incomplete: `{0}` has no shear stiffness")]
    MaterialIncomplete(String),

    #[error("evanescence violated: trial velocity {velocity} m/s outside ({lower}, {upper})")]
    EvanescenceViolated {
        velocity: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid search bracket: {0}")]
    InvalidBracket(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-uniform frequency grid at index {0}")]
    NonUniformGrid(usize),

    #[error("gate outside time record: {0}")]
    GateOutsideRecord(String),

    #[error("zero-magnitude sample at {0} Hz inside the analysis band")]
    ZeroMagnitude(f64),

    #[error("no zero-phase crossing in search band [{low}, {high}] Hz")]
    NoZeroCrossing { low: f64, high: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cannot ratio against zero-TCF reference")]
    ZeroTcfReference,

    #[error("unpairable rows, missing partners for indices {0:?}")]
    Unpairable(Vec<usize>),

    #[error("slot collision: {0}")]
    SlotCollision(String),

    #[error("no tag detected")]
    NoTagDetected,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input (configuration, arguments,
    /// malformed files) as opposed to failures while processing valid input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MaterialIncomplete(_)
                | Error::InvalidParameter { .. }
                | Error::InvalidBracket(_)
                | Error::Parse { .. }
                | Error::Config { .. }
        )
    }
}
