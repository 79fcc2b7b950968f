use std::path::{Path, PathBuf};

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flag value or config file; `at` locates the offending input.
    #[error("{at}: {message}")]
    Config { at: String, message: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Compute(#[from] lossy_walk::Error),

    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn config(at: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { at: at.into(), message: message.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_owned(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Compute(e) => e.kind(),
            CliError::Pool(_) => "pool",
        }
    }

    /// 2 for unusable input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Compute(e) if matches!(e.root(), lossy_walk::Error::InvalidParams(_) | lossy_walk::Error::InvalidConfig(_)) => 2,
            _ => 1,
        }
    }

    /// One-line JSON error record for stderr.
    pub fn record(&self) -> String {
        let mut rec = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            CliError::Config { at, .. } => rec["at"] = json!(at),
            CliError::Io { path, .. } => rec["path"] = json!(path.display().to_string()),
            CliError::Compute(e) => {
                if let Some(v) = e.point() {
                    rec["v"] = json!(v);
                }
            }
            CliError::Pool(_) => {}
        }
        rec.to_string()
    }
}
