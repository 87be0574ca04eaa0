//! Exit-code contract: 0 success / all checks pass, 1 usage error,
//! 2 verification failure, 3 runtime or numeric error.

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Runtime(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn verification(message: impl Into<String>) -> Self {
        CliError::Verification(message.into())
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError::Runtime(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Verification(m) | CliError::Runtime(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl From<bell_core::quantum::QuantumError> for CliError {
    fn from(e: bell_core::quantum::QuantumError) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<bell_core::experiment::ExperimentError> for CliError {
    fn from(e: bell_core::experiment::ExperimentError) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<bell_core::classical::MeasureError> for CliError {
    fn from(e: bell_core::classical::MeasureError) -> Self {
        CliError::runtime(e.to_string())
    }
}
