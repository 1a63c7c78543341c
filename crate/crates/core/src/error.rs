use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input")]
    NonFinite,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("unknown instance family `{0}`")]
    UnknownFamily(String),
    #[error("probe set is empty")]
    EmptyProbeSet,
    #[error("unknown setting `{0}`")]
    UnknownSetting(String),
    #[error("history is missing {0}")]
    MissingHistory(String),
    #[error("missing constant: {0}")]
    MissingConstant(&'static str),
    #[error("objective has no certified smoothness constant")]
    NotSmooth,
    #[error("objective has no certified strong convexity constant")]
    NotStronglyConvex,
    #[error("no linear minimization oracle for this set")]
    NoLmo,
    #[error("incompatible configuration: {0}")]
    IncompatibleConfiguration(String),
    #[error("invariant violated at k={k}: {which}")]
    InvariantViolation { k: usize, which: String },
    #[error("integration step rejected at t={t} after repeated halving")]
    StepRejected { t: f64 },
    #[error("t={0} is not on the trace grid")]
    OffGrid(f64),
    #[error("feasible set is unbounded")]
    UnboundedSet,
    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
