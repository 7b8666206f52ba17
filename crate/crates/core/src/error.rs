use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported spectrum: {0}")]
    UnsupportedSpectrum(String),

    /// The analytic distinct-eigenvalue formula was asked for a spectrum with
    /// repeated eigenvalues; the Jordan formula applies instead.
    #[error("repeated eigenvalues detected, use the Jordan volume formula: {0}")]
    RouteToJordan(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("state is unreachable: {0}")]
    Unreachable(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no feasible starting point: {0}")]
    InfeasibleStart(String),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::InvalidInput(_) => "invalid_input",
            Error::Parameter(_) => "parameter",
            Error::UnsupportedSpectrum(_) => "unsupported_spectrum",
            Error::RouteToJordan(_) => "route_to_jordan",
            Error::Unsupported(_) => "unsupported",
            Error::Decomposition(_) => "decomposition",
            Error::Resource(_) => "resource",
            Error::Divergence(_) => "divergence",
            Error::Unreachable(_) => "unreachable",
            Error::Hypothesis(_) => "hypothesis",
            Error::InfeasibleStart(_) => "infeasible_start",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
