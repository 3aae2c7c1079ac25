//! Error type shared across the toolkit.

use thiserror::Error;

/// All failure modes of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row could not be parsed. `line` is the 1-based line number in
    /// the file (the header is line 1).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The input stream contained no data records.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A header or feature layout did not match the expected schema.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// An argument or value violated an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Anomalous records were supplied to an operation that must only ever
    /// see benign data (fitting, training, calibration).
    #[error("label leakage: {0}")]
    Leakage(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// A JSON document (config, model, report) failed to deserialize.
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    /// A pipeline stage failed; wraps the underlying error with the stage name.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 invalid input/config, 2 I/O,
    /// 3 training diverged.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            Error::TrainingDiverged { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    /// Wrap the error with the name of the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Extension for attaching a stage name to any fallible pipeline step.
pub trait StageExt<T> {
    fn stage(self, name: &str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, name: &str) -> Result<T> {
        self.map_err(|e| e.in_stage(name))
    }
}
