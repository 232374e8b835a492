use std::fmt;

/// Exit status for bad flags, unreadable or malformed inputs.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for a computation that failed on valid input.
pub const EXIT_FAILURE: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "usage".into(),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "io".into(),
            message: format!("{}: {err}", path.display()),
        }
    }

    /// The single stderr line emitted on failure.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind,
            "message": self.message,
            "exit_code": self.code,
        })
        .to_string()
    }
}

impl From<cmcca::Error> for CliError {
    fn from(e: cmcca::Error) -> Self {
        Self {
            code: if e.is_input_error() { EXIT_USAGE } else { EXIT_FAILURE },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
