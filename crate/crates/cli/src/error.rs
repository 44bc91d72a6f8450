use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Solver(#[from] twohop::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Solver(e) => e.code(),
        }
    }

    /// Single-line `error: <code>: <detail>` rendering.
    pub fn render(&self) -> String {
        let detail = self.to_string().replace('\n', " ");
        format!("error: {}: {}", self.code(), detail.trim())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
