//! Top-level CLI error with a stable machine-parsable code per failure class.
//! Runtime failures print as `error: <code>: <detail>` and exit 1; usage
//! errors are clap's business and exit 2.

use crate::external::ExternalError;
use crate::manifest::ManifestError;
use crate::maskfile::MaskFileError;
use eigenrank_core::{EngineError, MaskError, MatrixError, SynthError};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    MaskFile(#[from] MaskFileError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    External(#[from] ExternalError),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid {backend} model spec {value:?}: {detail}")]
    BadModelSpec {
        backend: &'static str,
        value: String,
        detail: &'static str,
    },
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::MaskFile(e) => match e {
                MaskFileError::Io { .. } => "mask-io",
                MaskFileError::BadMagic { .. } => "bad-magic",
                MaskFileError::BadHeader { .. } => "bad-header",
                MaskFileError::Truncated { .. } => "truncated-mask",
                MaskFileError::TrailingBytes { .. } => "trailing-bytes",
                MaskFileError::BadPixelByte { .. } => "bad-pixel-byte",
            },
            CliError::Manifest(e) => match e {
                ManifestError::Io { .. } => "manifest-io",
                ManifestError::Parse { .. } => "manifest-parse",
                ManifestError::EmptyId { .. } => "manifest-empty-id",
                ManifestError::DuplicateId { .. } => "manifest-duplicate-id",
                ManifestError::MissingFile { .. } => "manifest-missing-file",
                ManifestError::MissingField { .. } => "manifest-missing-field",
                ManifestError::Mask(_) => "manifest-mask",
            },
            CliError::Engine(e) => match e {
                EngineError::Pool(_) => "pool",
                EngineError::Matrix(_) => "matrix",
                EngineError::Mask(_) => "mask",
                EngineError::SubsetSizeZero => "subset-size",
                EngineError::PoolTooSmall { .. } => "pool-too-small",
                EngineError::InsufficientUnselected { .. } => "insufficient-unselected",
                EngineError::TooFewIterations { .. } => "too-few-iterations",
                EngineError::TooFewModels { .. } => "too-few-models",
                EngineError::Backend { .. } => "backend",
                EngineError::MissingTruth { .. } => "missing-truth",
                EngineError::NoCases => "no-cases",
            },
            CliError::Matrix(_) => "matrix",
            CliError::Mask(_) => "mask",
            CliError::Synth(e) => match e {
                SynthError::EmptyDataset => "empty-dataset",
                SynthError::BadDimensions { .. } => "bad-dimensions",
                SynthError::EmptySubset => "empty-subset",
                SynthError::UnknownCase { .. } => "unknown-case",
                SynthError::BadEpsilon { .. } => "bad-epsilon",
                SynthError::BadOrder { .. } => "bad-order",
                SynthError::NoTrials => "no-trials",
                SynthError::NoSizes => "no-sizes",
                SynthError::Infeasible { .. } => "infeasible",
                SynthError::Matrix(_) => "matrix",
            },
            CliError::External(_) => "backend",
            CliError::Write { .. } => "write",
            CliError::BadModelSpec { .. } => "bad-model-spec",
        }
    }
}
