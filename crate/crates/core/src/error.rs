use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid keyword: empty after trimming")]
    EmptyKeyword,
    #[error("thesaurus: {0}")]
    Thesaurus(String),
    #[error("empty term set")]
    EmptyTermSet,
    #[error("term `{0}` does not occur in the corpus")]
    TermAbsent(String),
    #[error("term `{0}` has zero frequency")]
    ZeroFrequency(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty resolution range [{0}, {1}]")]
    EmptyRange(f64, f64),
    #[error("graph is disconnected ({} components); enable per-component layout", .0.len())]
    Disconnected(Vec<Vec<usize>>),
    #[error("coverage mismatch: {0}")]
    Coverage(String),
    #[error("segment `{0}` is empty")]
    EmptySegment(String),
    #[error("invalid range {0}..={1}")]
    InvalidRange(usize, usize),
    #[error("empty manifest")]
    EmptyManifest,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
