use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error reading {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        /// 1-based line number in the source text.
        row: usize,
        column: String,
        message: String,
    },

    #[error("column `{0}` is not numeric")]
    NonNumericColumn(String),

    #[error("row {row} has a missing value in column `{column}`")]
    MissingValue { row: usize, column: String },

    #[error("no numeric columns in input")]
    NoNumericColumns,

    #[error("no data rows in input")]
    NoRows,

    #[error("unknown dataset `{name}`; valid names are: {}", valid.join(", "))]
    UnknownDataset { name: String, valid: Vec<String> },

    #[error("invalid delimiter {0:?}: must be a single printable ASCII character")]
    InvalidDelimiter(char),

    #[error("need at least {required} {what}, got {actual}")]
    TooFew {
        what: &'static str,
        required: usize,
        actual: usize,
    },

    #[error("{rows} rows exceeds the pairwise-distance row cap of {cap}; subsample or raise the cap")]
    TooManyRows { rows: usize, cap: usize },

    #[error("sample is not sorted ascending (index {0})")]
    Unsorted(usize),

    #[error("sample contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("sample is degenerate: all values are equal")]
    Degenerate,

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("invalid simulation spec `{id}`: {message}")]
    InvalidSpec { id: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("preset file: {0}")]
    PresetFile(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
