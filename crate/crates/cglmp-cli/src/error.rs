//! CLI failures mapped onto the documented exit codes.

/// Exit codes: 0 success, 1 usage or I/O error, 2 solver
/// non-convergence, 3 verification failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lib(#[from] cglmp::Error),
    #[error("verification failed: {0} check(s) failed")]
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            // Bad arguments surface from the library as validation
            // errors; only a genuine solver failure is exit 2.
            CliError::Lib(e) => match e {
                cglmp::Error::NotConverged { .. } => 2,
                _ => 1,
            },
            CliError::Verification(_) => 3,
        }
    }
}
