use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error type. Variants map onto the CLI exit-code classes via
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed catalog row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("duplicate star id {id} at line {line}")]
    DuplicateId { id: u32, line: usize },

    #[error("star {id}: radius {r_kpc} kpc outside [{min}, {max}]")]
    RadiusOutOfRange {
        id: u32,
        r_kpc: f64,
        min: f64,
        max: f64,
    },

    #[error("unknown star id {0}")]
    UnknownStar(u32),

    #[error("epoch {t} Myr outside [{min}, {max}]")]
    EpochOutOfRange { t: f64, min: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("radius {r_kpc} kpc outside rotation-curve domain [{min}, {max}]")]
    OutsideCurveDomain { r_kpc: f64, min: f64, max: f64 },

    #[error("invalid rotation curve: {0}")]
    InvalidCurve(String),

    #[error("trajectory left the force-field domain at t = {t} Myr (r = {r_kpc} kpc)")]
    DomainExit { t: f64, r_kpc: f64 },

    #[error("integrator step size underflow at t = {t} Myr")]
    StepUnderflow { t: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("shooting solver did not converge after {iterations} iterations (best residual {residual:e} kpc)")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("shooting Jacobian is singular (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("no transfer satisfies the budget within the iteration cap: {0}")]
    Infeasible(String),

    #[error("no candidate star: {0}")]
    NoCandidate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed event log at record {record}: {reason}")]
    EventLog { record: usize, reason: String },

    #[error("ephemeris cache: {0}")]
    Cache(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the batch driver: 3 for campaigns that cannot
    /// be made feasible, 2 for everything else (unreadable or invalid
    /// inputs, rejected configs, solver failures).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) | Error::NoCandidate(_) => 3,
            _ => 2,
        }
    }

    /// Short stable tag used in machine-parsable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedRow { .. } => "malformed_row",
            Error::DuplicateId { .. } => "duplicate_id",
            Error::RadiusOutOfRange { .. } => "radius_out_of_range",
            Error::UnknownStar(_) => "unknown_star",
            Error::EpochOutOfRange { .. } => "epoch_out_of_range",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::OutsideCurveDomain { .. } => "outside_curve_domain",
            Error::InvalidCurve(_) => "invalid_curve",
            Error::DomainExit { .. } => "domain_exit",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::TooManySteps(_) => "too_many_steps",
            Error::NonConvergence { .. } => "non_convergence",
            Error::SingularJacobian { .. } => "singular_jacobian",
            Error::Infeasible(_) => "infeasible",
            Error::NoCandidate(_) => "no_candidate",
            Error::Config(_) => "config",
            Error::EventLog { .. } => "event_log",
            Error::Cache(_) => "cache",
            Error::Capacity(_) => "capacity",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
