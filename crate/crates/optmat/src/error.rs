use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("query parse error: {0}")]
    QueryParse(String),

    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),

    #[error("unsupported pattern: {0}")]
    UnsupportedPattern(String),

    #[error("query contains a Cartesian product: {0}")]
    CartesianProduct(String),

    #[error("corrupt row payload: {0}")]
    CorruptRow(String),

    #[error("mask width {mask} does not match dimension width {dim}")]
    WidthMismatch { mask: u32, dim: u32 },

    #[error("index format error in {path}: {msg}")]
    IndexFormat { path: String, msg: String },

    #[error("dictionary format error: {0}")]
    DictFormat(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
