use std::fmt;

/// Failure category, which fixes the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// bad configuration or input values (exit 2)
    Config,
    /// a numerical stage failed (exit 3)
    Numerical,
    /// reading or writing files failed (exit 4)
    Io,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub stage: String,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            stage: "config".into(),
            message: message.into(),
        }
    }

    pub fn io(stage: &str, message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Io,
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

/// Attaches a stage name to core errors and classifies them.
pub trait Stage<T> {
    fn stage(self, name: &str) -> CliResult<T>;
}

impl<T> Stage<T> for pmac::Result<T> {
    fn stage(self, name: &str) -> CliResult<T> {
        self.map_err(|e| {
            let kind = if e.is_numerical() {
                ErrorKind::Numerical
            } else if e.is_io() || matches!(e, pmac::Error::Parse { .. }) {
                ErrorKind::Io
            } else {
                ErrorKind::Config
            };
            CliError {
                kind,
                stage: name.into(),
                message: e.to_string(),
            }
        })
    }
}

impl<T> Stage<T> for std::io::Result<T> {
    fn stage(self, name: &str) -> CliResult<T> {
        self.map_err(|e| CliError::io(name, e.to_string()))
    }
}
