use std::path::PathBuf;

/// Errors produced by the pipeline crates.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid json in {path} line {line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("empty glossary: {name}")]
    EmptyGlossary { name: String },

    #[error("unknown glossary `{name}` referenced at line {line}, column {col}")]
    UnknownGlossary { name: String, line: usize, col: usize },

    #[error("unknown sentence id: {sent_id}")]
    UnknownSentence { sent_id: String },

    #[error("insufficient labels: class `{class}` has {count} example(s), need at least {needed}")]
    InsufficientLabels {
        class: String,
        count: usize,
        needed: usize,
    },

    #[error("invalid split ratio {ratio}; must lie strictly between 0 and 1")]
    InvalidRatio { ratio: f64 },

    #[error("degenerate training set: all examples share label `{label}`")]
    DegenerateTrainingSet { label: bool },

    #[error("prediction/gold key sets differ; only in predictions: {only_pred:?}, only in gold: {only_gold:?}")]
    KeyMismatch {
        only_pred: Vec<String>,
        only_gold: Vec<String>,
    },

    #[error("labeling gate not satisfied for `{indicator}`: {missing} sampled sentence(s) lack a human label (first: {first:?})")]
    LabelingGate {
        indicator: String,
        missing: usize,
        first: Vec<String>,
    },

    #[error("stage `{stage}` has not completed; run `{stage}` first")]
    MissingStage { stage: String },

    #[error("stage `{stage}` is stale: {reason}; rerun it")]
    StaleStage { stage: String, reason: String },

    #[error("project is locked by another process (lock file {path})")]
    ProjectLocked { path: PathBuf },

    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
