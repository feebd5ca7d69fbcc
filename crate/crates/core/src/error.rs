use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config value out of range: {}", .0.join("; "))]
    ConfigRange(Vec<String>),

    #[error("scenario generation failed: {0}")]
    Generation(String),

    #[error("empty population: {0}")]
    DegeneratePopulation(&'static str),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by the user's configuration rather than by a failure at
    /// run time. The CLI maps these to a distinct exit code.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse { .. } | Error::ConfigRange(_) | Error::InvalidInput(_)
        )
    }
}
