//! The segmenter-backend contract: the engine's only view of "a model".
//!
//! Anything that can train on a labeled subset and predict a binary mask per
//! case can drive the selection loop — the in-process synthetic backend, or
//! an external training system attached over the subprocess protocol.

use crate::mask::BinaryMask;
use crate::pool::CaseId;

/// Backends report failures as boxed errors; the engine wraps them with
/// case/model context.
pub type BackendError = Box<dyn std::error::Error + Send + Sync + 'static>;

/// A trainable segmentation system.
///
/// Contract: `predict` is deterministic given `(model, case)` and `train` is
/// deterministic given `(subset, seed)`. The engine relies on both for
/// byte-reproducible runs.
pub trait SegmenterBackend {
    type Model;

    /// Train one model on a labeled subset. Labels are the backend's own
    /// business (ground-truth masks from its dataset or manifest).
    fn train(&self, subset: &[CaseId], seed: u64) -> Result<Self::Model, BackendError>;

    /// Segment one case with a trained model.
    fn predict(&self, model: &Self::Model, case: &CaseId) -> Result<BinaryMask, BackendError>;
}

/// Access to reference segmentations, for evaluation harnesses only — the
/// selection loop itself never looks at ground truth.
pub trait GroundTruthSource {
    fn truth(&self, case: &CaseId) -> Result<BinaryMask, BackendError>;
}
