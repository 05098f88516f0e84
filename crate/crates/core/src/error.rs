use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("row {row}, column '{column}': {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("predictor '{name}': {message}")]
    Predictor { name: String, message: String },

    #[error(
        "action set would hold {count} actions, above the cap of {cap}; \
         use coarser bins, a smaller max_bin_shift or a lower sparsity"
    )]
    ActionSetTooLarge { count: u128, cap: usize },

    #[error("cache of {rows} x {actions} cells needs about {bytes} bytes, above the cap of {cap} bytes")]
    CacheTooLarge {
        rows: usize,
        actions: usize,
        bytes: u128,
        cap: u128,
    },

    #[error("cache file {path}: {message}")]
    CacheFile { path: PathBuf, message: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("audit: {0}")]
    Audit(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn predictor(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Predictor {
            name: name.into(),
            message: message.into(),
        }
    }

    /// Wraps an error with the pipeline stage it came from.
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by user-supplied configuration or inputs.
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::Schema(_)
                | Error::Config(_)
                | Error::Cell { .. }
                | Error::Data(_)
                | Error::File { .. }
                | Error::Json(_)
                | Error::Csv(_)
                | Error::ActionSetTooLarge { .. }
                | Error::CacheTooLarge { .. }
        )
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.root(), Error::Infeasible(_))
    }
}

pub(crate) trait ResultExt<T> {
    fn at(self, stage: &'static str) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn at(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}
