use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Line and column are 1-based positions in the file, header included.
    #[error("cannot parse {value:?} as a real number at line {line}, column {column}")]
    Parse { line: usize, column: usize, value: String },

    #[error("line {line} has {found} fields, expected {expected}")]
    RaggedRows { line: usize, expected: usize, found: usize },

    #[error("dataset has no observations")]
    EmptyDataset,

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("invalid dataset shape: {0}")]
    InvalidShape(String),

    #[error("non-finite value at row {row}, column {column} (0-based)")]
    NonFinite { row: usize, column: usize },

    #[error("need at least 2 classes, found {0}")]
    TooFewClasses(usize),

    #[error("class {label:?} has {count} observation(s); at least 2 are required")]
    TinyClass { label: String, count: usize },

    #[error("need at least {min} observations, found {n}")]
    TooSmall { n: usize, min: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("permutation count must be at least 1")]
    InvalidB,

    #[error("degenerate sample: all values coincide")]
    DegenerateSample,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
