use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode surfaced by the toolkit.
///
/// The runner maps each variant onto a distinct process exit code through
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("exponential overflow: kappa0*|u|^2 = {exponent:.3} exceeds {limit}")]
    Overflow { exponent: f64, limit: f64 },

    #[error("no ground state: {0}")]
    NoGroundState(String),

    #[error("ground state validation failed: {0}")]
    ValidationFailure(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("missing ground state: {0}")]
    MissingGroundState(String),

    #[error("blowup suspected at t = {t}: {reason}")]
    BlowupSuspected { t: f64, reason: String },

    #[error("boundary contamination at t = {t}: outer-band mass fraction {fraction:.3e}")]
    BoundaryContamination { t: f64, fraction: f64 },

    #[error("config invalid at `{path}`: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid { .. } => 2,
            Error::HypothesisViolation(_) => 3,
            Error::BlowupSuspected { .. } => 4,
            Error::BoundaryContamination { .. } => 5,
            Error::ValidationFailure(_) => 6,
            Error::NoGroundState(_) | Error::MissingGroundState(_) => 7,
            Error::Overflow { .. } => 8,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_) => 9,
            Error::InvalidArgument(_)
            | Error::InvalidField(_)
            | Error::UnsupportedGrid(_)
            | Error::Unsupported(_)
            | Error::DomainTooSmall(_) => 10,
        }
    }

    /// Short kebab-case class name used in reports and sweep tables.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidField(_) => "invalid-field",
            Error::UnsupportedGrid(_) => "unsupported-grid",
            Error::Unsupported(_) => "unsupported",
            Error::Overflow { .. } => "overflow",
            Error::NoGroundState(_) => "no-ground-state",
            Error::ValidationFailure(_) => "validation-failure",
            Error::DomainTooSmall(_) => "domain-too-small",
            Error::HypothesisViolation(_) => "hypothesis-violation",
            Error::MissingGroundState(_) => "missing-ground-state",
            Error::BlowupSuspected { .. } => "blowup-suspected",
            Error::BoundaryContamination { .. } => "boundary-contamination",
            Error::ConfigInvalid { .. } => "config-invalid",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
