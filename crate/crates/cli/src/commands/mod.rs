pub mod consistency;
pub mod evaluate;
pub mod report;
pub mod score;
pub mod simulate;

/// Error carrying the process exit code.
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

pub type CliResult = Result<(), CliError>;
