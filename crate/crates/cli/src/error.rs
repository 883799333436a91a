//! Error kinds and their exit codes.

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid scenario, unwritable output.
    #[error("{0}")]
    Input(String),
    /// A library routine rejected the scenario's numbers.
    #[error(transparent)]
    Core(#[from] jdcc_core::Error),
    /// The acceptance suite ran and at least one criterion failed.
    #[error("{0}")]
    ValidationFailed(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// 1 validation failure, 2 input error, 3 internal numeric failure.
    pub fn exit_code(&self) -> u8 {
        use jdcc_core::Error as E;
        match self {
            CliError::ValidationFailed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Core(E::Domain(_) | E::InfeasibleTarget(_) | E::DegenerateGeometry(_)) => 2,
            CliError::Core(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "validation_failure",
            2 => "input_error",
            _ => "numeric_failure",
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: u8,
            message: String,
        }
        let r = Record { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&r).expect("record serializes")
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

impl From<jdcc_validate::Error> for CliError {
    fn from(e: jdcc_validate::Error) -> Self {
        match e {
            jdcc_validate::Error::Core(c) => CliError::Core(c),
            other => CliError::Input(other.to_string()),
        }
    }
}
