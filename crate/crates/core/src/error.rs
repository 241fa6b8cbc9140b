//! Error taxonomy. Exit-code mapping: validation 2, numeric 3, I/O 4.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("invalid {what}: {message}")]
    Validation { what: &'static str, message: String },

    #[error("lattice error: {0}")]
    NonIntegerLattice(String),

    #[error("resolution: {what} needs Ng >= {required}, grid has Ng = {ng}")]
    Resolution {
        what: String,
        required: usize,
        ng: usize,
    },

    #[error("strict mode infeasible at lambda = {lambda}: sigma*r = {sigma_r:.3e} > {limit:.3e}; smallest feasible lambda ~ {min_lambda:.3e}")]
    StrictInfeasible {
        lambda: u64,
        sigma_r: f64,
        limit: f64,
        min_lambda: f64,
    },

    #[error("energy bracket not positive at t = {t}: e(t)(1 - delta/2) - int|v0|^2 = {bracket:.6e}")]
    NonPositiveRho0 { t: f64, bracket: f64 },

    #[error("direction coefficient gamma^2 = {value:.6e} <= 0 for direction {dir}; input stress outside the admissible ball")]
    NonPositiveCoefficient { dir: usize, value: f64 },

    #[error("direction system singular: |det| = {det:.3e}")]
    SingularSystem { det: f64 },

    #[error("advective CFL violated: dt = {dt:.3e} > {dt_max:.3e}")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("oscillation factor must be mean-free, found mean {mean:.3e}")]
    NonZeroMean { mean: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Tag an error with the pipeline stage it aborted.
pub fn at_stage<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage,
        source: Box::new(e),
    })
}

impl Error {
    /// Process exit code for the CLI: validation-class 2, numeric-class 3, I/O 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Validation { .. }
            | Error::NonIntegerLattice(_)
            | Error::Resolution { .. }
            | Error::StrictInfeasible { .. } => 2,
            Error::NonPositiveRho0 { .. }
            | Error::NonPositiveCoefficient { .. }
            | Error::SingularSystem { .. }
            | Error::CflViolation { .. }
            | Error::NonZeroMean { .. }
            | Error::Numeric(_) => 3,
            Error::Io(_) => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
