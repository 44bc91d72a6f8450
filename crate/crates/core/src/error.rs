use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    RootNotBracketed { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("no convergence after {evaluations} evaluations (estimate {estimate}, error bound {error_bound})")]
    NoConvergence {
        estimate: f64,
        error_bound: f64,
        evaluations: usize,
    },

    #[error("infeasible power budget: {0}")]
    InfeasiblePower(String),

    #[error("boundary condition unsolvable: {0}")]
    BoundaryUnsolvable(String),

    #[error("allocation outside growth region: x = {x} not in any region of d/dx(x^2 f) > 0")]
    OutsideGrowthRegion { x: f64 },

    #[error("relay interval collapse at D_r = {dr}")]
    RelayIntervalCollapse { dr: f64 },

    #[error("parametric family mismatch (rms_rel = {rms_rel})")]
    FamilyMismatch { rms_rel: f64 },

    #[error("closed form out of domain: {0}")]
    ClosedFormDomain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("{failed} of {total} profile points failed")]
    ProfileFailures { failed: usize, total: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidInput(_) => "invalid-input",
            Error::RootNotBracketed { .. } => "root-not-bracketed",
            Error::NoConvergence { .. } => "no-convergence",
            Error::InfeasiblePower(_) => "infeasible-power",
            Error::BoundaryUnsolvable(_) => "boundary-unsolvable",
            Error::OutsideGrowthRegion { .. } => "outside-growth-region",
            Error::RelayIntervalCollapse { .. } => "relay-interval-collapse",
            Error::FamilyMismatch { .. } => "family-mismatch",
            Error::ClosedFormDomain(_) => "closed-form-domain",
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::ProfileFailures { .. } => "profile-failures",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
