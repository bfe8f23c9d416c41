use thiserror::Error;

/// Everything that can go wrong across the library.
///
/// Detected blowup is never an error: solvers report it through their result
/// types. These variants cover invalid inputs, genuine numeric breakdown, and
/// configuration problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be a positive integer (at most {max}), got {dim}")]
    InvalidDimension { dim: usize, max: usize },

    #[error("{context}: {reason}")]
    Domain {
        context: &'static str,
        reason: String,
    },

    #[error("radial kernel is singular at radius 0 in dimension {dim}")]
    Singularity { dim: usize },

    #[error("t = {t} is at or past the bound's blowup time {blowup}")]
    PastSingularity { t: f64, blowup: f64 },

    #[error("non-finite value produced at t = {time}")]
    NumericFailure { time: f64 },

    #[error("density vanishes inside its support near r = {radius}")]
    VacuumRegion { radius: f64 },

    #[error("density is identically zero: total mass is degenerate")]
    DegenerateMass,

    #[error("adiabatic exponent must exceed 1 here, got {gamma}")]
    UnsupportedExponent { gamma: f64 },

    #[error("domain [{a}, {b}] covers {found} profile nodes, need at least {needed}")]
    Resolution {
        a: f64,
        b: f64,
        found: usize,
        needed: usize,
    },

    #[error("trace holds {found} samples, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config line {line}: unknown key `{key}`")]
    ConfigUnknownKey { line: usize, key: String },

    #[error("config line {line}: invalid value for `{key}`: {message}")]
    ConfigValue {
        line: usize,
        key: String,
        message: String,
    },

    #[error("config: missing required key `{key}`")]
    ConfigMissing { key: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(context: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            context,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
