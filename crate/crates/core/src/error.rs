use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Syntax or schema error. The message carries the line/column locus.
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("{origin}: invalid {field}: {invariant}")]
    Validation {
        origin: String,
        field: String,
        invariant: String,
    },

    #[error("unknown cache link `{0}`")]
    UnknownLink(String),

    #[error("unknown level `{0}`")]
    UnknownLevel(String),

    #[error("bandwidth must be positive, got {0} GB/s")]
    NonPositiveBandwidth(f64),

    #[error("micro-op `{uop}` cannot issue: none of {wanted:?} is provided by the machine")]
    Infeasible { uop: String, wanted: Vec<String> },

    #[error("policy {0:?} is not implemented")]
    UnsupportedPolicy(crate::traffic::HierarchyPolicy),

    #[error("notation error at byte {pos}: {message}")]
    Notation { pos: usize, message: String },

    #[error("unknown bundled asset `{0}`")]
    UnknownAsset(String),
}

impl Error {
    pub(crate) fn validation(
        origin: impl Into<String>,
        field: impl Into<String>,
        invariant: impl Into<String>,
    ) -> Self {
        Error::Validation {
            origin: origin.into(),
            field: field.into(),
            invariant: invariant.into(),
        }
    }

    /// True when the error comes from the model itself rather than from bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}
