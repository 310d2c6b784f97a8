//! Deterministic text rendering of reports and tables.
//!
//! Every float goes through [`fmt_float`] (12 significant digits, scientific
//! notation), key order is fixed, and collections are emitted in their stored
//! deterministic order, so identical runs produce byte-identical documents.

use eigenrank_core::{
    CaseId, DiceStats, EvalReport, FailureReport, SelectionReport, SimulationTable,
};
use std::fmt::Write;

/// Pinned float formatting: 12 significant digits, scientific.
pub fn fmt_float(x: f64) -> String {
    // collapse -0.0 so sign noise cannot leak into reports
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

fn join_ids(ids: &[CaseId]) -> String {
    ids.iter().map(CaseId::as_str).collect::<Vec<_>>().join(" ")
}

fn write_ledger(out: &mut String, ledger: &[(CaseId, f64)]) {
    out.push_str("ledger =\n");
    for (id, score) in ledger {
        let _ = writeln!(out, "  {id} {}", fmt_float(*score));
    }
}

fn write_stats(out: &mut String, prefix: &str, stats: &DiceStats) {
    let _ = writeln!(out, "{prefix}-count = {}", stats.count);
    let _ = writeln!(out, "{prefix}-mean = {}", fmt_float(stats.mean));
    let _ = writeln!(out, "{prefix}-stdev = {}", fmt_float(stats.stdev));
}

pub fn render_selection(report: &SelectionReport, backend: &str, pool_size: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eigenrank selection report");
    let _ = writeln!(out, "backend = {backend}");
    let _ = writeln!(out, "metric = {}", report.metric.name());
    let _ = writeln!(out, "score = {}", report.mode.name());
    let _ = writeln!(out, "k = {}", report.k);
    let _ = writeln!(out, "iterations = {}", report.iterations);
    let _ = writeln!(out, "seed = {}", report.seed);
    let _ = writeln!(out, "pool-size = {pool_size}");
    let _ = writeln!(out, "selected-count = {}", report.selection.len());
    for record in &report.subsets {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "[subset {}] origin={} counted={}",
            record.index,
            record.origin.name(),
            if record.counted { "yes" } else { "no" }
        );
        let _ = writeln!(out, "cases = {}", join_ids(&record.cases));
        if let Some(ledger) = &record.ledger {
            write_ledger(&mut out, ledger);
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[selection]");
    for id in &report.selection {
        let _ = writeln!(out, "{id}");
    }
    out
}

pub fn render_failure(
    report: &FailureReport,
    backend: &str,
    metric: &str,
    score: &str,
    probe: &str,
    pool_size: usize,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eigenrank failure analysis report");
    let _ = writeln!(out, "mode = iterative");
    let _ = writeln!(out, "backend = {backend}");
    let _ = writeln!(out, "metric = {metric}");
    let _ = writeln!(out, "score = {score}");
    let _ = writeln!(out, "k = {}", report.k);
    let _ = writeln!(out, "iterations = {}", report.iterations);
    let _ = writeln!(out, "seed = {}", report.seed);
    let _ = writeln!(out, "probe = {probe}");
    let _ = writeln!(out, "pool-size = {pool_size}");
    if let Some(stats) = &report.pool_stats {
        write_stats(&mut out, "pool", stats);
    }
    for row in &report.rows {
        let _ = writeln!(out);
        let _ = writeln!(out, "[iteration {}]", row.iteration);
        let _ = writeln!(out, "batch = {}", join_ids(&row.batch));
        if let Some(stats) = &row.eliminated_stats {
            write_stats(&mut out, "eliminated", stats);
        } else {
            let _ = writeln!(out, "eliminated-count = {}", row.eliminated_count);
        }
        if let Some(stats) = &row.remaining_stats {
            write_stats(&mut out, "remaining", stats);
        } else {
            let _ = writeln!(out, "remaining-count = {}", row.remaining_count);
        }
        write_ledger(&mut out, &row.ledger);
    }
    out
}

pub fn render_ranking(
    ranking: &[(CaseId, f64)],
    backend: &str,
    metric: &str,
    score: &str,
    models: usize,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eigenrank failure ranking");
    let _ = writeln!(out, "mode = fixed");
    let _ = writeln!(out, "backend = {backend}");
    let _ = writeln!(out, "metric = {metric}");
    let _ = writeln!(out, "score = {score}");
    let _ = writeln!(out, "models = {models}");
    let _ = writeln!(out, "cases = {}", ranking.len());
    let _ = writeln!(out);
    let _ = writeln!(out, "[ranking]");
    for (id, score) in ranking {
        let _ = writeln!(out, "{id} {}", fmt_float(*score));
    }
    out
}

pub fn render_eval(report: &EvalReport, backend: &str, model: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eigenrank evaluation report");
    let _ = writeln!(out, "backend = {backend}");
    let _ = writeln!(out, "model = {model}");
    let _ = writeln!(out, "cases = {}", report.stats.count);
    let _ = writeln!(out, "mean = {}", fmt_float(report.stats.mean));
    let _ = writeln!(out, "stdev = {}", fmt_float(report.stats.stdev));
    let _ = writeln!(out);
    let _ = writeln!(out, "[per-case]");
    for (id, score) in &report.per_case {
        let _ = writeln!(out, "{id} {}", fmt_float(*score));
    }
    out
}

pub fn render_sim_csv(table: &SimulationTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t,epsilon,mean_ratio,stdev_ratio,undefined_count");
    for row in &table.rows {
        let mean = row
            .mean_ratio
            .map(fmt_float)
            .unwrap_or_else(|| "undefined".to_string());
        let stdev = row
            .stdev_ratio
            .map(fmt_float)
            .unwrap_or_else(|| "undefined".to_string());
        let _ = writeln!(
            out,
            "{},{},{mean},{stdev},{}",
            row.t,
            fmt_float(row.epsilon),
            row.undefined
        );
    }
    out
}
