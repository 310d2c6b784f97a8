//! Runtime dispatch over the two backend kinds so command code stays generic.

use crate::external::{ExternalBackend, ExternalModel};
use eigenrank_core::{
    BackendError, BinaryMask, CaseId, SegmenterBackend, SyntheticBackend, SyntheticModel,
};

pub enum AnyBackend<'m> {
    Synthetic(SyntheticBackend),
    External(ExternalBackend<'m>),
}

#[derive(Debug, Clone)]
pub enum AnyModel {
    Synthetic(SyntheticModel),
    External(ExternalModel),
}

impl SegmenterBackend for AnyBackend<'_> {
    type Model = AnyModel;

    fn train(&self, subset: &[CaseId], seed: u64) -> Result<AnyModel, BackendError> {
        match self {
            AnyBackend::Synthetic(backend) => Ok(AnyModel::Synthetic(backend.train(subset, seed)?)),
            AnyBackend::External(backend) => Ok(AnyModel::External(backend.train(subset, seed)?)),
        }
    }

    fn predict(&self, model: &AnyModel, case: &CaseId) -> Result<BinaryMask, BackendError> {
        match (self, model) {
            (AnyBackend::Synthetic(backend), AnyModel::Synthetic(model)) => {
                backend.predict(model, case)
            }
            (AnyBackend::External(backend), AnyModel::External(model)) => {
                backend.predict(model, case)
            }
            _ => Err("model handle does not belong to this backend".into()),
        }
    }
}

impl AnyBackend<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            AnyBackend::Synthetic(_) => "synthetic",
            AnyBackend::External(_) => "external",
        }
    }
}
