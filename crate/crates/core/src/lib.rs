//! Ensemble-disagreement engine for binary segmentation.
//!
//! The core idea: given t models trained on disjoint subsets, build the t×t
//! matrix of pairwise Dice scores among their segmentations of one case. Its
//! principal eigenvalue equals t when the models fully agree and shrinks
//! toward 1 as they diverge, so it ranks cases by how much the ensemble
//! disputes them. The selection loop ([`engine`]) grows a training set by
//! repeatedly claiming the most disputed cases; the same score ranks cases
//! by predicted segmentation failure ([`engine::rank_failures_fixed`],
//! [`harness::run_failure_elimination`]).
//!
//! The [`synth`] module provides a deterministic synthetic dataset and a
//! perturbation segmenter so the whole pipeline can be exercised and verified
//! at desk scale; [`sim`] samples feasible agreement matrices to measure how
//! the principal eigenvalue dominates the spectrum's information as ensembles
//! grow.

pub mod backend;
pub mod engine;
pub mod harness;
pub mod jacobi;
pub mod mask;
pub mod matrix;
pub mod pool;
pub mod seeds;
pub mod sim;
pub mod synth;

pub use backend::{BackendError, GroundTruthSource, SegmenterBackend};
pub use engine::{
    initialize, iterate, rank_failures_fixed, run_selection, score_case, EngineError, ScoreConfig,
    ScoreMode, SelectionReport, SelectionState, SubsetOrigin, SubsetRecord,
};
pub use harness::{
    compare_to_random, evaluate_model, run_failure_elimination, ComparisonReport, ComparisonRow,
    DiceStats, EliminationRow, EvalReport, FailureReport,
};
pub use mask::{dice, jaccard, BinaryMask, MaskError, OverlapMetric};
pub use matrix::{
    dominance_ratio, trio_feasibility, von_neumann_entropy, DiceMatrix, MatrixError,
    SpectralSummary, PSD_TOLERANCE,
};
pub use pool::{CaseId, Pool, PoolError};
pub use sim::{
    run_conjecture_simulation, sample_feasible_dice_matrix, SimRow, SimulationConfig,
    SimulationTable,
};
pub use synth::{
    generate_dataset, true_dice_eval, GrayImage, SynthError, SyntheticBackend, SyntheticCase,
    SyntheticModel,
};
