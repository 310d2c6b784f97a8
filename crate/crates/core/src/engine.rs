//! The iterative selection loop and per-case disagreement scoring.
//!
//! The loop bootstraps with two random disjoint subsets, trains a model on
//! each, and scores every unselected case by how much the trained models
//! disagree on it: plain pairwise overlap while there are two models, and the
//! principal eigenvalue of the pairwise agreement matrix once there are more.
//! The k lowest-scoring (most disputed) cases form the next subset; its model
//! joins the ensemble on the following iteration. No ground truth is consulted
//! at any point.
//!
//! Lower score always means more disagreement: λ_max equals the ensemble size
//! t under full agreement and shrinks toward 1 as predictions diverge.

use crate::backend::{BackendError, SegmenterBackend};
use crate::mask::{BinaryMask, OverlapMetric};
use crate::matrix::{DiceMatrix, MatrixError};
use crate::pool::{CaseId, Pool, PoolError};
use crate::seeds;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

const PURPOSE_BOOTSTRAP: u64 = 0x01;
const PURPOSE_TRAIN: u64 = 0x02;
pub(crate) const PURPOSE_RANDOM_ARM: u64 = 0x03;
pub(crate) const PURPOSE_PROBE_SELECTED: u64 = 0x04;
pub(crate) const PURPOSE_PROBE_RANDOM: u64 = 0x05;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Mask(#[from] crate::mask::MaskError),
    #[error("subset size k must be at least 1")]
    SubsetSizeZero,
    #[error("pool has {available} cases, this run needs at least {needed}")]
    PoolTooSmall { needed: usize, available: usize },
    #[error("only {remaining} unselected cases remain, next subset needs {needed}")]
    InsufficientUnselected { needed: usize, remaining: usize },
    #[error("need at least {needed} iterations, got {got}")]
    TooFewIterations { needed: usize, got: usize },
    #[error("scoring needs at least 2 models, got {got}")]
    TooFewModels { got: usize },
    #[error("backend failure ({context}): {source}")]
    Backend {
        context: String,
        #[source]
        source: BackendError,
    },
    #[error("cannot obtain ground truth for case {case}: {source}")]
    MissingTruth {
        case: CaseId,
        #[source]
        source: BackendError,
    },
    #[error("evaluation needs at least one case")]
    NoCases,
}

fn backend_err(context: impl Into<String>) -> impl FnOnce(BackendError) -> EngineError {
    let context = context.into();
    move |source| EngineError::Backend { context, source }
}

/// What a case's ledger score is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    /// Principal eigenvalue of the agreement matrix (the default ranking).
    #[default]
    LambdaMax,
    /// Negated trace-normalized Von Neumann entropy, so that lower still
    /// means more disagreement.
    NormalizedEntropy,
}

impl ScoreMode {
    pub fn name(&self) -> &'static str {
        match self {
            ScoreMode::LambdaMax => "lambda-max",
            ScoreMode::NormalizedEntropy => "entropy",
        }
    }
}

/// Metric and score-mode switches for a selection run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoreConfig {
    pub metric: OverlapMetric,
    pub mode: ScoreMode,
}

/// Disagreement score of one set of predictions (lower = more disagreement).
fn score_masks(predictions: &[BinaryMask], config: ScoreConfig) -> Result<f64, MatrixError> {
    let matrix = DiceMatrix::from_masks(predictions, config.metric)?;
    match config.mode {
        ScoreMode::LambdaMax => Ok(matrix.eigenvalues()?[0]),
        ScoreMode::NormalizedEntropy => Ok(-matrix.spectral_summary()?.entropy_normalized),
    }
}

/// State of a selection run: subsets with trained models, plus the one
/// pending subset chosen by the latest ledger and not yet trained on.
#[derive(Debug)]
pub struct SelectionState<M> {
    seed: u64,
    k: usize,
    trained_subsets: Vec<Vec<CaseId>>,
    models: Vec<M>,
    pending_subset: Vec<CaseId>,
    /// Ledger that produced `pending_subset`, in pool order.
    scores: Vec<(CaseId, f64)>,
}

impl<M> SelectionState<M> {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of trained models, i.e. the iteration counter t.
    pub fn iteration(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[M] {
        &self.models
    }

    pub fn trained_subsets(&self) -> &[Vec<CaseId>] {
        &self.trained_subsets
    }

    pub fn pending_subset(&self) -> &[CaseId] {
        &self.pending_subset
    }

    pub fn scores(&self) -> &[(CaseId, f64)] {
        &self.scores
    }

    /// All cases claimed so far, trained subsets plus pending.
    pub fn selected_cases(&self) -> BTreeSet<&CaseId> {
        self.trained_subsets
            .iter()
            .flatten()
            .chain(self.pending_subset.iter())
            .collect()
    }
}

fn train_seed(seed: u64, subset_index: usize) -> u64 {
    seeds::combine(seeds::combine(seed, PURPOSE_TRAIN), subset_index as u64)
}

/// Draw `count` distinct cases uniformly without replacement (partial
/// Fisher-Yates over the pool order).
fn draw_without_replacement(pool: &Pool, count: usize, rng: &mut ChaCha8Rng) -> Vec<CaseId> {
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    for i in 0..count {
        let j = i + rng.random_range(0..indices.len() - i);
        indices.swap(i, j);
    }
    indices[..count]
        .iter()
        .map(|&i| pool.cases()[i].clone())
        .collect()
}

/// The k cases with the smallest ledger scores; ties broken by ascending
/// score then lexicographic case id.
fn k_smallest(ledger: &[(CaseId, f64)], k: usize) -> Vec<CaseId> {
    let mut sorted: Vec<&(CaseId, f64)> = ledger.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    sorted
        .into_iter()
        .take(k)
        .map(|(id, _)| id.clone())
        .collect()
}

fn unselected<'p, M>(pool: &'p Pool, state: &SelectionState<M>) -> Vec<&'p CaseId> {
    let taken: BTreeSet<&CaseId> = state
        .trained_subsets
        .iter()
        .flatten()
        .chain(state.pending_subset.iter())
        .collect();
    pool.iter().filter(|c| !taken.contains(c)).collect()
}

/// Bootstrap a selection run: draw two disjoint random subsets, train a model
/// on each, score every other case by the pairwise overlap of the two
/// predictions, and mark the k most disputed cases as the pending subset.
pub fn initialize<B: SegmenterBackend>(
    pool: &Pool,
    k: usize,
    backend: &B,
    seed: u64,
    config: ScoreConfig,
) -> Result<SelectionState<B::Model>, EngineError> {
    if k == 0 {
        return Err(EngineError::SubsetSizeZero);
    }
    if pool.len() < 3 * k {
        return Err(EngineError::PoolTooSmall {
            needed: 3 * k,
            available: pool.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seeds::combine(seed, PURPOSE_BOOTSTRAP));
    let drawn = draw_without_replacement(pool, 2 * k, &mut rng);
    let subset_one = drawn[..k].to_vec();
    let subset_two = drawn[k..].to_vec();

    let model_one = backend
        .train(&subset_one, train_seed(seed, 1))
        .map_err(backend_err("training subset 1"))?;
    let model_two = backend
        .train(&subset_two, train_seed(seed, 2))
        .map_err(backend_err("training subset 2"))?;

    let taken: BTreeSet<&CaseId> = subset_one.iter().chain(subset_two.iter()).collect();
    let mut scores = Vec::with_capacity(pool.len() - 2 * k);
    for case in pool.iter().filter(|c| !taken.contains(c)) {
        let prediction_one = backend
            .predict(&model_one, case)
            .map_err(backend_err(format!("model 1 predicting case {case}")))?;
        let prediction_two = backend
            .predict(&model_two, case)
            .map_err(backend_err(format!("model 2 predicting case {case}")))?;
        let score = config.metric.score(&prediction_one, &prediction_two)?;
        scores.push((case.clone(), score));
    }
    let pending_subset = k_smallest(&scores, k);

    Ok(SelectionState {
        seed,
        k,
        trained_subsets: vec![subset_one, subset_two],
        models: vec![model_one, model_two],
        pending_subset,
        scores,
    })
}

/// One loop iteration: train the pending subset's model, rebuild the ledger
/// over every unselected case from the full ensemble's agreement spectra, and
/// pick the next pending subset from the k smallest scores.
pub fn iterate<B: SegmenterBackend>(
    state: &mut SelectionState<B::Model>,
    pool: &Pool,
    backend: &B,
    config: ScoreConfig,
) -> Result<(), EngineError> {
    let remaining = unselected(pool, state).len();
    if remaining < state.k {
        return Err(EngineError::InsufficientUnselected {
            needed: state.k,
            remaining,
        });
    }

    let subset_index = state.models.len() + 1;
    let newest = state.pending_subset.clone();
    let model = backend
        .train(&newest, train_seed(state.seed, subset_index))
        .map_err(backend_err(format!("training subset {subset_index}")))?;
    state.trained_subsets.push(newest);
    state.pending_subset.clear();
    state.models.push(model);

    let mut scores = Vec::new();
    for case in unselected(pool, state) {
        let mut predictions = Vec::with_capacity(state.models.len());
        for (index, model) in state.models.iter().enumerate() {
            let mask = backend.predict(model, case).map_err(backend_err(format!(
                "model {} predicting case {case}",
                index + 1
            )))?;
            predictions.push(mask);
        }
        let score = score_masks(&predictions, config)?;
        scores.push((case.clone(), score));
    }

    state.pending_subset = k_smallest(&scores, state.k);
    state.scores = scores;
    Ok(())
}

/// Disagreement score of one case under an ensemble of trained models.
pub fn score_case<B: SegmenterBackend>(
    backend: &B,
    models: &[B::Model],
    case: &CaseId,
    config: ScoreConfig,
) -> Result<f64, EngineError> {
    if models.len() < 2 {
        return Err(EngineError::TooFewModels { got: models.len() });
    }
    let mut predictions = Vec::with_capacity(models.len());
    for (index, model) in models.iter().enumerate() {
        let mask = backend.predict(model, case).map_err(backend_err(format!(
            "model {} predicting case {case}",
            index + 1
        )))?;
        predictions.push(mask);
    }
    Ok(score_masks(&predictions, config)?)
}

/// Score every pool case under a frozen ensemble and sort ascending (most
/// disputed first), ties broken by case id. Label-free failure prediction.
pub fn rank_failures_fixed<B: SegmenterBackend>(
    backend: &B,
    models: &[B::Model],
    pool: &Pool,
    config: ScoreConfig,
) -> Result<Vec<(CaseId, f64)>, EngineError> {
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    if models.len() < 2 {
        return Err(EngineError::TooFewModels { got: models.len() });
    }
    let mut ranking = Vec::with_capacity(pool.len());
    for case in pool.iter() {
        let score = score_case(backend, models, case, config)?;
        ranking.push((case.clone(), score));
    }
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranking)
}

/// How a subset entered the selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetOrigin {
    /// Random bootstrap draw.
    Random,
    /// Chosen from the two-model pairwise-overlap ledger.
    Pairwise,
    /// Chosen from an agreement-spectrum ledger (three or more models).
    Spectral,
}

impl SubsetOrigin {
    pub fn name(&self) -> &'static str {
        match self {
            SubsetOrigin::Random => "random",
            SubsetOrigin::Pairwise => "pairwise",
            SubsetOrigin::Spectral => "spectral",
        }
    }
}

/// One subset in a selection report, with the ledger that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetRecord {
    /// 1-based subset number.
    pub index: usize,
    pub origin: SubsetOrigin,
    pub cases: Vec<CaseId>,
    /// Scores the subset was chosen from (absent for random draws), pool order.
    pub ledger: Option<Vec<(CaseId, f64)>>,
    /// Whether the subset counts toward the delivered selection. The trailing
    /// subset constructed after the last training step is recorded but not
    /// counted.
    pub counted: bool,
}

/// Full record of a selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub k: usize,
    pub iterations: usize,
    pub seed: u64,
    pub metric: OverlapMetric,
    pub mode: ScoreMode,
    pub subsets: Vec<SubsetRecord>,
    /// The delivered selection: subsets 1..=iterations flattened, k·T cases.
    pub selection: Vec<CaseId>,
}

/// Run the full loop: bootstrap, then iterate until `iterations` subsets have
/// trained models. The report carries every subset (including the trailing
/// uncounted one) with its ledger, and is a pure function of
/// `(pool, k, iterations, seed, backend)`.
pub fn run_selection<B: SegmenterBackend>(
    pool: &Pool,
    k: usize,
    iterations: usize,
    backend: &B,
    seed: u64,
    config: ScoreConfig,
) -> Result<SelectionReport, EngineError> {
    if iterations < 2 {
        return Err(EngineError::TooFewIterations {
            needed: 2,
            got: iterations,
        });
    }
    if k == 0 {
        return Err(EngineError::SubsetSizeZero);
    }
    if pool.len() < (iterations + 1) * k {
        return Err(EngineError::PoolTooSmall {
            needed: (iterations + 1) * k,
            available: pool.len(),
        });
    }

    let mut state = initialize(pool, k, backend, seed, config)?;
    let mut subsets = vec![
        SubsetRecord {
            index: 1,
            origin: SubsetOrigin::Random,
            cases: state.trained_subsets[0].clone(),
            ledger: None,
            counted: true,
        },
        SubsetRecord {
            index: 2,
            origin: SubsetOrigin::Random,
            cases: state.trained_subsets[1].clone(),
            ledger: None,
            counted: true,
        },
        SubsetRecord {
            index: 3,
            origin: SubsetOrigin::Pairwise,
            cases: state.pending_subset.clone(),
            ledger: Some(state.scores.clone()),
            counted: iterations >= 3,
        },
    ];

    for _ in 3..=iterations {
        iterate(&mut state, pool, backend, config)?;
        let index = state.models.len() + 1;
        subsets.push(SubsetRecord {
            index,
            origin: SubsetOrigin::Spectral,
            cases: state.pending_subset.clone(),
            ledger: Some(state.scores.clone()),
            counted: index <= iterations,
        });
    }

    let selection: Vec<CaseId> = subsets
        .iter()
        .filter(|record| record.counted)
        .flat_map(|record| record.cases.iter().cloned())
        .collect();
    debug_assert_eq!(selection.len(), k * iterations);

    Ok(SelectionReport {
        k,
        iterations,
        seed,
        metric: config.metric,
        mode: config.mode,
        subsets,
        selection,
    })
}
