//! Evaluation harnesses: true-Dice scoring of trained models, iterative
//! failure elimination, and the selection-vs-random comparison protocol.
//!
//! Everything here consumes ground truth; the selection loop itself never
//! does. Statistics use the population (not sample) denominator.

use crate::backend::{GroundTruthSource, SegmenterBackend};
use crate::engine::{
    self, initialize, iterate, run_selection, EngineError, ScoreConfig, SelectionReport,
};
use crate::mask::dice;
use crate::pool::{CaseId, Pool};
use crate::seeds;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Population mean and standard deviation of a score set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiceStats {
    pub mean: f64,
    pub stdev: f64,
    pub count: usize,
}

impl DiceStats {
    /// `None` for an empty score set.
    pub fn from_scores(scores: &[f64]) -> Option<Self> {
        if scores.is_empty() {
            return None;
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let variance = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        Some(Self {
            mean,
            stdev: variance.sqrt(),
            count: scores.len(),
        })
    }
}

/// Per-case true Dice of one model plus aggregate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_case: Vec<(CaseId, f64)>,
    pub stats: DiceStats,
}

/// Compare a model's predictions against ground truth on the given cases.
/// The metric is always Dice (this is the accuracy measure, not the
/// disagreement score).
pub fn evaluate_model<B: SegmenterBackend>(
    backend: &B,
    model: &B::Model,
    cases: &[CaseId],
    truth: &dyn GroundTruthSource,
) -> Result<EvalReport, EngineError> {
    if cases.is_empty() {
        return Err(EngineError::NoCases);
    }
    let mut per_case = Vec::with_capacity(cases.len());
    for case in cases {
        let reference = truth
            .truth(case)
            .map_err(|source| EngineError::MissingTruth {
                case: case.clone(),
                source,
            })?;
        let prediction = backend
            .predict(model, case)
            .map_err(|source| EngineError::Backend {
                context: format!("predicting case {case}"),
                source,
            })?;
        per_case.push((case.clone(), dice(&prediction, &reference)?));
    }
    let scores: Vec<f64> = per_case.iter().map(|(_, s)| *s).collect();
    let stats = DiceStats::from_scores(&scores).expect("nonempty by construction");
    Ok(EvalReport { per_case, stats })
}

/// One elimination step: the batch removed and the probe model's true-Dice
/// statistics over everything eliminated so far vs everything remaining.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationRow {
    /// 1-based elimination iteration.
    pub iteration: usize,
    /// The batch removed this iteration (subset `iteration + 2` of the loop).
    pub batch: Vec<CaseId>,
    /// Ledger the batch was chosen from, pool order.
    pub ledger: Vec<(CaseId, f64)>,
    /// Probe statistics over all eliminated cases so far (cumulative).
    pub eliminated_stats: Option<DiceStats>,
    /// Probe statistics over the cases not yet eliminated.
    pub remaining_stats: Option<DiceStats>,
    pub eliminated_count: usize,
    pub remaining_count: usize,
}

/// Record of an iterative failure-analysis run.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    pub k: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Probe statistics over the whole pool (when ground truth is available).
    pub pool_stats: Option<DiceStats>,
    pub rows: Vec<EliminationRow>,
}

/// Run the selection loop over a pool as an elimination process: each chosen
/// subset is a batch of predicted-difficult cases pulled out of the pool.
/// The two random bootstrap subsets are not counted as eliminated (they keep
/// their place in the remaining-side statistics); iteration i eliminates the
/// i-th disagreement-chosen subset. After each iteration the probe model —
/// trained elsewhere, never part of the eliminating ensemble — is scored
/// against ground truth on both sides when truth is available.
#[allow(clippy::too_many_arguments)]
pub fn run_failure_elimination<B: SegmenterBackend>(
    pool: &Pool,
    k: usize,
    iterations: usize,
    backend: &B,
    probe: &B::Model,
    truth: Option<&dyn GroundTruthSource>,
    seed: u64,
    config: ScoreConfig,
) -> Result<FailureReport, EngineError> {
    let probe_scores: Option<BTreeMap<CaseId, f64>> = match truth {
        Some(truth) => {
            let report = evaluate_model(backend, probe, pool.cases(), truth)?;
            Some(report.per_case.into_iter().collect())
        }
        None => None,
    };
    let stats_over = |cases: &BTreeSet<CaseId>| -> Option<DiceStats> {
        let map = probe_scores.as_ref()?;
        let scores: Vec<f64> = cases.iter().map(|c| map[c]).collect();
        DiceStats::from_scores(&scores)
    };
    let pool_stats = probe_scores.as_ref().and_then(|map| {
        let scores: Vec<f64> = map.values().copied().collect();
        DiceStats::from_scores(&scores)
    });

    if iterations == 0 {
        return Ok(FailureReport {
            k,
            iterations,
            seed,
            pool_stats,
            rows: Vec::new(),
        });
    }

    let needed = (iterations + 2) * k;
    if pool.len() < needed {
        return Err(EngineError::PoolTooSmall {
            needed,
            available: pool.len(),
        });
    }

    let mut state = initialize(pool, k, backend, seed, config)?;
    let mut eliminated: BTreeSet<CaseId> = BTreeSet::new();
    let mut rows = Vec::with_capacity(iterations);
    for iteration in 1..=iterations {
        let batch = state.pending_subset().to_vec();
        eliminated.extend(batch.iter().cloned());
        let remaining: BTreeSet<CaseId> = pool
            .iter()
            .filter(|c| !eliminated.contains(c))
            .cloned()
            .collect();
        rows.push(EliminationRow {
            iteration,
            ledger: state.scores().to_vec(),
            eliminated_stats: stats_over(&eliminated),
            remaining_stats: stats_over(&remaining),
            eliminated_count: eliminated.len(),
            remaining_count: remaining.len(),
            batch,
        });
        if iteration < iterations {
            iterate(&mut state, pool, backend, config)?;
        }
    }

    Ok(FailureReport {
        k,
        iterations,
        seed,
        pool_stats,
        rows,
    })
}

/// One iteration row of the selection-vs-random comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub seed: u64,
    /// Iteration t; the training sets hold t·k cases.
    pub iteration: usize,
    /// Both arms evaluated on the common holdout (pool minus both arms'
    /// final selections, fixed across iterations).
    pub selected_common: DiceStats,
    pub random_common: DiceStats,
    /// Each arm evaluated on its own complement at iteration t.
    pub selected_own: DiceStats,
    pub random_own: DiceStats,
}

/// Comparison of models trained on engine-selected vs randomly-selected
/// subsets of the same size, under both holdout protocols.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub k: usize,
    pub iterations: usize,
    pub rows: Vec<ComparisonRow>,
}

fn eval_stats<B: SegmenterBackend>(
    backend: &B,
    model: &B::Model,
    cases: &[CaseId],
    truth: &dyn GroundTruthSource,
) -> Result<DiceStats, EngineError> {
    Ok(evaluate_model(backend, model, cases, truth)?.stats)
}

fn arm_rows<B: SegmenterBackend>(
    pool: &Pool,
    backend: &B,
    truth: &dyn GroundTruthSource,
    seed: u64,
    selection: &SelectionReport,
    random_order: &[CaseId],
) -> Result<Vec<ComparisonRow>, EngineError> {
    let (k, iterations) = (selection.k, selection.iterations);
    let final_selected: BTreeSet<&CaseId> = selection.selection.iter().collect();
    let final_random: BTreeSet<&CaseId> = random_order[..iterations * k].iter().collect();
    let common: Vec<CaseId> = pool
        .iter()
        .filter(|c| !final_selected.contains(c) && !final_random.contains(c))
        .cloned()
        .collect();

    let mut rows = Vec::new();
    for t in 3..=iterations {
        let selected_train: Vec<CaseId> = selection
            .subsets
            .iter()
            .filter(|record| record.counted && record.index <= t)
            .flat_map(|record| record.cases.iter().cloned())
            .collect();
        let random_train: Vec<CaseId> = random_order[..t * k].to_vec();

        let selected_model = backend
            .train(
                &selected_train,
                seeds::combine(
                    seeds::combine(seed, engine::PURPOSE_PROBE_SELECTED),
                    t as u64,
                ),
            )
            .map_err(|source| EngineError::Backend {
                context: format!("training selected-arm probe at iteration {t}"),
                source,
            })?;
        let random_model = backend
            .train(
                &random_train,
                seeds::combine(seeds::combine(seed, engine::PURPOSE_PROBE_RANDOM), t as u64),
            )
            .map_err(|source| EngineError::Backend {
                context: format!("training random-arm probe at iteration {t}"),
                source,
            })?;

        let own = |train: &[CaseId]| -> Vec<CaseId> {
            let taken: BTreeSet<&CaseId> = train.iter().collect();
            pool.iter()
                .filter(|c| !taken.contains(c))
                .cloned()
                .collect()
        };

        rows.push(ComparisonRow {
            seed,
            iteration: t,
            selected_common: eval_stats(backend, &selected_model, &common, truth)?,
            random_common: eval_stats(backend, &random_model, &common, truth)?,
            selected_own: eval_stats(backend, &selected_model, &own(&selected_train), truth)?,
            random_own: eval_stats(backend, &random_model, &own(&random_train), truth)?,
        });
    }
    Ok(rows)
}

/// For each seed: run the selection loop, draw a nested random selection of
/// the same sizes, train one fresh model per arm and iteration on the
/// cumulative training set, and evaluate on (a) the common holdout excluding
/// both arms' final selections and (b) each arm's own complement.
pub fn compare_to_random<B: SegmenterBackend>(
    pool: &Pool,
    k: usize,
    iterations: usize,
    backend: &B,
    truth: &dyn GroundTruthSource,
    seeds_list: &[u64],
    config: ScoreConfig,
) -> Result<ComparisonReport, EngineError> {
    if iterations < 3 {
        return Err(EngineError::TooFewIterations {
            needed: 3,
            got: iterations,
        });
    }
    // Both arms select iterations*k cases; the common holdout must survive
    // the worst case of fully disjoint selections.
    let needed = (2 * iterations * k + 1).max((iterations + 1) * k);
    if pool.len() < needed {
        return Err(EngineError::PoolTooSmall {
            needed,
            available: pool.len(),
        });
    }

    let mut rows = Vec::new();
    for &seed in seeds_list {
        let selection = run_selection(pool, k, iterations, backend, seed, config)?;
        let mut order: Vec<CaseId> = pool.cases().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::combine(seed, engine::PURPOSE_RANDOM_ARM));
        for i in 0..iterations * k {
            let j = i + rng.random_range(0..order.len() - i);
            order.swap(i, j);
        }
        rows.extend(arm_rows(pool, backend, truth, seed, &selection, &order)?);
    }
    Ok(ComparisonReport {
        k,
        iterations,
        rows,
    })
}
