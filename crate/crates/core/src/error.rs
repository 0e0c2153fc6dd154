use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    Validation(String),

    #[error("marker index {index} out of range ({n_markers} markers)")]
    MarkerOutOfRange { index: usize, n_markers: usize },

    #[error("pair ({0}, {0}) repeats a marker")]
    SameMarker(usize),

    /// Every subject is missing the marker (or pair); no category is populated.
    #[error("degenerate test: no non-missing subjects")]
    Degenerate,

    /// Only one category is populated, so no odds contrast exists.
    #[error("untestable: only one non-empty category")]
    Untestable,

    #[error("no (h, f) entry for k = {k}")]
    MissingHf { k: usize },

    #[error("h/f table has order {found}, expected {expected}")]
    WrongOrder { expected: u8, found: u8 },

    #[error("argument out of domain: {0}")]
    Domain(&'static str),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("model fit failed: {0}")]
    Fit(&'static str),
}
