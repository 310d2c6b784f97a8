//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with the measured quantities (run with `--nocapture` to see them).
//!
//! Criteria in brief:
//!   C1  analytic spectra (all-ones, identity, the 3-model conflict matrix)
//!   C2  mask-built matrices are PSD with feasible trios (1000 ensembles)
//!   C3  Jacobi spectra match characteristic-polynomial roots (200 matrices)
//!   C4  dominance ratio tightens with ensemble size; exact at epsilon 0
//!   C5  selection captures the hard cluster of a bimodal pool
//!   C6  selection-trained probes are more robust than random-trained ones
//!   C7  failure elimination separates hard cases at every iteration
//!   C8  lambda-max and entropy rankings concord (Spearman pinned at 0.95)
//!   C9  byte-level determinism of select/rank/simulate; mask round-trips
//!   C10 k=3, T=7 selects exactly 21 cases in disjoint triples

use eigenrank_core::{
    compare_to_random, generate_dataset, initialize, jacobi, run_conjecture_simulation,
    run_failure_elimination, run_selection, sample_feasible_dice_matrix, seeds, trio_feasibility,
    BinaryMask, CaseId, DiceMatrix, OverlapMetric, Pool, ScoreConfig, SegmenterBackend,
    SimulationConfig, SyntheticBackend,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::Command;

const MASK_DIM: usize = 32;

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Characteristic-polynomial eigenvalue oracle, independent of the Jacobi
/// path: expand det(A - xI) with Faddeev-LeVerrier, then isolate the (all
/// real) roots by recursing on the derivative's roots and bisecting each
/// monotone segment.
mod charpoly {
    /// Coefficients `[c0, c1, .., cn]` of det(A - xI) * (-1)^n, i.e. the
    /// monic polynomial x^n + c_{n-1} x^{n-1} + ... + c0.
    pub fn characteristic(n: usize, a: &[f64]) -> Vec<f64> {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        let mut m: Vec<f64> = {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                m[i * n + i] = 1.0;
            }
            m
        };
        for k in 1..=n {
            // M <- A * M
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut sum = 0.0;
                    for l in 0..n {
                        sum += a[i * n + l] * m[l * n + j];
                    }
                    next[i * n + j] = sum;
                }
            }
            m = next;
            let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
            let c = -trace / k as f64;
            coeffs[n - k] = c;
            for i in 0..n {
                m[i * n + i] += c;
            }
        }
        coeffs
    }

    fn eval(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn derivative(coeffs: &[f64]) -> Vec<f64> {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as f64 * c)
            .collect()
    }

    fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = eval(coeffs, lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fmid = eval(coeffs, mid);
            if fmid == 0.0 {
                return mid;
            }
            if (flo < 0.0) == (fmid < 0.0) {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All real roots, ascending. Valid for polynomials whose roots are all
    /// real (characteristic polynomials of symmetric matrices).
    pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
        let n = coeffs.len() - 1;
        let lead = coeffs[n];
        if n == 1 {
            return vec![-coeffs[0] / lead];
        }
        let bound = 1.0
            + coeffs[..n]
                .iter()
                .map(|c| (c / lead).abs())
                .fold(0.0, f64::max);
        // roots of the derivative split the line into monotone segments,
        // and each segment holds exactly one root (interlacing)
        let mut points = vec![-bound];
        points.extend(
            real_roots(&derivative(coeffs))
                .into_iter()
                .filter(|c| c.abs() < bound),
        );
        points.push(bound);

        let mut roots = Vec::with_capacity(n);
        for pair in points.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let (flo, fhi) = (eval(coeffs, lo), eval(coeffs, hi));
            if flo == 0.0 {
                roots.push(lo);
            } else if (flo < 0.0) != (fhi < 0.0) || fhi == 0.0 {
                roots.push(bisect(coeffs, lo, hi));
            } else {
                // no sign change: a (near-)double root pinned at the segment
                // endpoint with the smaller magnitude
                roots.push(if flo.abs() <= fhi.abs() { lo } else { hi });
            }
        }
        roots.truncate(n);
        roots
    }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[order[k]] = midrank;
        }
        i = j + 1;
    }
    out
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..rx.len() {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.random::<f64>() < density)
}

// ---------------------------------------------------------------------------
// C1..C4: spectral machinery
// ---------------------------------------------------------------------------

#[test]
fn c01_spectral_oracles() {
    for t in 2..=20usize {
        let ones = jacobi::symmetric_eigenvalues(t, &vec![1.0; t * t]).unwrap();
        assert!((ones[0] - t as f64).abs() <= 1e-9);
        for &l in &ones[1..] {
            assert!(l.abs() <= 1e-9);
        }

        let mut id = vec![0.0; t * t];
        for i in 0..t {
            id[i * t + i] = 1.0;
        }
        let idspec = jacobi::symmetric_eigenvalues(t, &id).unwrap();
        for &l in &idspec {
            assert!((l - 1.0).abs() <= 1e-9);
        }
    }

    let conflict = [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0];
    let spectrum = jacobi::symmetric_eigenvalues(3, &conflict).unwrap();
    let sqrt2 = std::f64::consts::SQRT_2;
    let exact = [1.0 + sqrt2, 1.0, 1.0 - sqrt2];
    // coarsely rounded reference values as commonly quoted; they sit 5.79e-3
    // from the exact spectrum, so the loose comparison bound is 6e-3 and the
    // binding check is the exact one at 1e-9
    let quoted = [2.42, 1.0, -0.42];
    for i in 0..3 {
        assert!((spectrum[i] - exact[i]).abs() <= 1e-9);
        assert!((spectrum[i] - quoted[i]).abs() <= 6e-3);
    }
    println!(
        "ACCEPTANCE C1 PASS: all-ones/identity spectra exact to 1e-9 for t=2..20; conflict matrix spectrum [{:.6}, {:.6}, {:.6}]",
        spectrum[0], spectrum[1], spectrum[2]
    );
}

#[test]
fn c02_mask_built_matrices_are_psd_with_feasible_trios() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_02);
    let mut min_eig = f64::INFINITY;
    for round in 0..1000 {
        let t = 2 + round % 11;
        let density = match round % 6 {
            0 => 0.0,
            1 => 0.08,
            2 => 0.3,
            3 => 0.5,
            4 => 0.85,
            _ => rng.random::<f64>(),
        };
        let masks: Vec<BinaryMask> = (0..t)
            .map(|_| random_mask(&mut rng, 16, 16, density))
            .collect();
        let matrix = DiceMatrix::from_masks(&masks, OverlapMetric::Dice).unwrap();
        let eigs = matrix.eigenvalues().unwrap();
        min_eig = min_eig.min(eigs[eigs.len() - 1]);
        assert!(
            eigs[eigs.len() - 1] >= -1e-8,
            "ensemble {round}: min eigenvalue {}",
            eigs[eigs.len() - 1]
        );
        for p in 0..t {
            for q in (p + 1)..t {
                for r in (q + 1)..t {
                    assert!(trio_feasibility(
                        matrix.entry(p, q),
                        matrix.entry(q, r),
                        matrix.entry(r, p)
                    )
                    .unwrap());
                }
            }
        }
    }
    println!("ACCEPTANCE C2 PASS: 1000 mask-built matrices PSD (worst min eigenvalue {min_eig:.2e}) with all trios feasible");
}

#[test]
fn c03_eigensolver_matches_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_03);
    let mut worst = 0.0f64;
    for round in 0..200 {
        let n = if round % 2 == 0 { 3 } else { 4 };
        let mut a = vec![0.0; n * n];
        for p in 0..n {
            for q in p..n {
                let v = 2.0 * rng.random::<f64>() - 1.0;
                a[p * n + q] = v;
                a[q * n + p] = v;
            }
        }
        let fast = jacobi::symmetric_eigenvalues(n, &a).unwrap();
        let mut slow = charpoly::real_roots(&charpoly::characteristic(n, &a));
        slow.reverse(); // ascending -> descending
        assert_eq!(slow.len(), n);
        for i in 0..n {
            let err = (fast[i] - slow[i]).abs();
            worst = worst.max(err);
            assert!(
                err <= 1e-8,
                "matrix {round}: eigenvalue {i} differs by {err:e} ({} vs {})",
                fast[i],
                slow[i]
            );
        }
    }
    println!("ACCEPTANCE C3 PASS: 200 random symmetric spectra match polynomial-root oracle (worst deviation {worst:.2e})");
}

#[test]
fn c04_dominance_ratio_tightens_with_ensemble_size() {
    // exactness at epsilon = 0
    let exact = run_conjecture_simulation(&SimulationConfig {
        t_values: vec![2, 5, 20, 50],
        epsilon: 0.0,
        trials: 500,
        seed: 20_04,
    })
    .unwrap();
    for row in &exact.rows {
        assert_eq!(row.mean_ratio, Some(1.0), "t={} not exact", row.t);
        assert_eq!(row.stdev_ratio, Some(0.0));
        assert_eq!(row.undefined, 0);
    }

    let mut summary = String::new();
    for epsilon in [0.05, 0.1] {
        let table = run_conjecture_simulation(&SimulationConfig {
            t_values: vec![5, 50],
            epsilon,
            trials: 500,
            seed: 20_04,
        })
        .unwrap();
        let dev_small = (table.rows[0].mean_ratio.unwrap() - 1.0).abs();
        let dev_large = (table.rows[1].mean_ratio.unwrap() - 1.0).abs();
        assert!(
            dev_large < dev_small,
            "epsilon {epsilon}: |ratio-1| grew from {dev_small} (t=5) to {dev_large} (t=50)"
        );
        summary.push_str(&format!(
            " eps={epsilon}: {dev_small:.4} (t=5) -> {dev_large:.4} (t=50);"
        ));
    }
    println!("ACCEPTANCE C4 PASS: mean |dominance ratio - 1| shrinks with t and is exactly 1 at epsilon 0;{summary}");
}

// ---------------------------------------------------------------------------
// C5..C7: selection and failure-analysis behavior on the synthetic lab
// ---------------------------------------------------------------------------

/// 90 easy cases near difficulty 0.3 and 10 hard ones near 0.9.
fn bimodal_backend(seed: u64) -> SyntheticBackend {
    let mut cases = generate_dataset(100, MASK_DIM, MASK_DIM, 4000 + seed).unwrap();
    for (i, case) in cases.iter_mut().enumerate() {
        let wobble = ((seeds::combine(seed, i as u64) % 1000) as f64 / 1000.0 - 0.5) * 0.1;
        case.difficulty = if i < 90 { 0.3 + wobble } else { 0.9 + wobble };
    }
    SyntheticBackend::new(&cases)
}

#[test]
fn c05_selection_captures_the_hard_cluster() {
    let mut captures = Vec::new();
    let mut wins = 0;
    for seed in 0..10u64 {
        let backend = bimodal_backend(seed);
        let pool = backend.pool();
        let state = initialize(&pool, 3, &backend, seed, ScoreConfig::default()).unwrap();
        let hard = state
            .pending_subset()
            .iter()
            .filter(|case| case.as_str()[5..].parse::<usize>().unwrap() >= 90)
            .count();
        captures.push(hard);
        if hard >= 2 {
            wins += 1;
        }
    }
    assert!(
        wins >= 8,
        "only {wins}/10 seeds captured >=2 hard cases (captures: {captures:?})"
    );
    println!("ACCEPTANCE C5 PASS: first chosen subset held >=2 of the 10 hard cases in {wins}/10 seeds (hits per seed: {captures:?})");
}

#[test]
fn c06_selection_trained_probes_are_more_robust_than_random() {
    let mut stdev_wins = 0;
    let mut mean_selected = 0.0;
    let mut mean_random = 0.0;
    for seed in 0..10u64 {
        let cases = generate_dataset(100, MASK_DIM, MASK_DIM, 9000 + seed).unwrap();
        let backend = SyntheticBackend::new(&cases);
        let pool = backend.pool();
        let report = compare_to_random(
            &pool,
            3,
            7,
            &backend,
            &backend,
            &[seed],
            ScoreConfig::default(),
        )
        .unwrap();
        let last = report.rows.last().unwrap();
        assert_eq!(last.iteration, 7);
        if last.selected_own.stdev < last.random_own.stdev {
            stdev_wins += 1;
        }
        mean_selected += last.selected_own.mean / 10.0;
        mean_random += last.random_own.mean / 10.0;
    }
    assert!(
        stdev_wins >= 8,
        "selection stdev beat random in only {stdev_wins}/10 seeds"
    );
    assert!(
        mean_selected >= mean_random - 0.02,
        "selection mean {mean_selected} fell more than 0.02 below random {mean_random}"
    );
    println!(
        "ACCEPTANCE C6 PASS: method-specific holdout at t=7: selection stdev < random stdev in {stdev_wins}/10 seeds; mean Dice {mean_selected:.4} (selection) vs {mean_random:.4} (random)"
    );
}

#[test]
fn c07_failure_elimination_separates_hard_cases() {
    let cases = generate_dataset(100, MASK_DIM, MASK_DIM, 777).unwrap();
    let backend = SyntheticBackend::new(&cases);
    let everything = backend.pool();

    // probe trained on a random left-out set of 15; the other 85 are the pool
    let mut order: Vec<CaseId> = everything.cases().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..order.len() - 1 {
        let j = i + rng.random_range(0..order.len() - i);
        order.swap(i, j);
    }
    let probe = backend.train(&order[..15], 31).unwrap();
    let pool = Pool::new(order[15..].to_vec()).unwrap();

    let report = run_failure_elimination(
        &pool,
        3,
        7,
        &backend,
        &probe,
        Some(&backend),
        9,
        ScoreConfig::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 7);
    for row in &report.rows {
        let eliminated = row.eliminated_stats.unwrap();
        let remaining = row.remaining_stats.unwrap();
        assert!(
            eliminated.mean < remaining.mean,
            "iteration {}: eliminated mean {} not below remaining mean {}",
            row.iteration,
            eliminated.mean,
            remaining.mean
        );
    }
    let first = report.rows[0].remaining_stats.unwrap();
    let last = report.rows[6].remaining_stats.unwrap();
    assert!(
        last.stdev <= first.stdev,
        "remaining stdev rose from {} to {}",
        first.stdev,
        last.stdev
    );
    println!(
        "ACCEPTANCE C7 PASS: eliminated mean below remaining mean at all 7 iterations; remaining stdev {:.4} -> {:.4}",
        first.stdev, last.stdev
    );
}

// ---------------------------------------------------------------------------
// C8: score-mode concordance
// ---------------------------------------------------------------------------

#[test]
fn c08_lambda_max_and_entropy_rankings_concord() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_08);
    let mut lambda = Vec::with_capacity(500);
    let mut entropy = Vec::with_capacity(500);
    for _ in 0..500 {
        let matrix = sample_feasible_dice_matrix(8, 0.3, &mut rng).unwrap();
        let summary = matrix.spectral_summary().unwrap();
        lambda.push(summary.lambda_max);
        entropy.push(summary.entropy_normalized);
    }
    // ascending lambda-max order vs descending entropy order
    let negated: Vec<f64> = entropy.iter().map(|h| -h).collect();
    let rho = spearman(&lambda, &negated);
    assert!(
        rho >= 0.95,
        "Spearman correlation {rho} below the pinned 0.95"
    );
    println!("ACCEPTANCE C8 PASS: Spearman(lambda-max asc, normalized entropy desc) = {rho:.4} over 500 matrices (t=8, eps=0.3)");
}

// ---------------------------------------------------------------------------
// C9, C10: determinism and cardinality
// ---------------------------------------------------------------------------

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eigenrank"))
}

fn run_ok(args: &[&str]) {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn c09_cli_outputs_are_deterministic_and_masks_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    run_ok(&[
        "synth-gen",
        "--n",
        "100",
        "--seed",
        "12",
        "--out-dir",
        data_dir.to_str().unwrap(),
    ]);
    let manifest = data_dir.join("manifest.toml");
    let manifest_arg = manifest.to_str().unwrap();

    let select = |out: &PathBuf| {
        run_ok(&[
            "select",
            "--manifest",
            manifest_arg,
            "--k",
            "3",
            "--iterations",
            "7",
            "--backend",
            "synthetic",
            "--seed",
            "40",
            "--out",
            out.to_str().unwrap(),
        ]);
    };
    let rank = |out: &PathBuf| {
        run_ok(&[
            "rank",
            "--manifest",
            manifest_arg,
            "--backend",
            "synthetic",
            "--mode",
            "iterative",
            "--k",
            "3",
            "--iterations",
            "5",
            "--seed",
            "41",
            "--probe",
            "0.5:3",
            "--out",
            out.to_str().unwrap(),
        ]);
    };
    let simulate = |out: &PathBuf| {
        run_ok(&[
            "simulate",
            "--t",
            "4,8",
            "--epsilon",
            "0.2",
            "--trials",
            "50",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
    };

    for (name, runner) in [
        ("select", &select as &dyn Fn(&PathBuf)),
        ("rank", &rank),
        ("simulate", &simulate),
    ] {
        let a = tmp.path().join(format!("{name}-a.txt"));
        let b = tmp.path().join(format!("{name}-b.txt"));
        runner(&a);
        runner(&b);
        assert_eq!(read(&a), read(&b), "{name} outputs differ between runs");
    }

    // the k=3, T=7 selection report carries exactly 21 cases
    let select_text = std::fs::read_to_string(tmp.path().join("select-a.txt")).unwrap();
    assert!(select_text.contains("selected-count = 21"));

    let mut rng = ChaCha8Rng::seed_from_u64(20_09);
    for round in 0..100 {
        let w = 1 + (rng.random::<u32>() % 32) as usize;
        let h = 1 + (rng.random::<u32>() % 32) as usize;
        let density = match round % 4 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        };
        let mask = random_mask(&mut rng, w, h, density);
        let path = tmp.path().join(format!("roundtrip-{round}.emsk"));
        eigenrank_cli::maskfile::write_mask(&mask, &path).unwrap();
        assert_eq!(eigenrank_cli::maskfile::read_mask(&path).unwrap(), mask);
    }
    println!("ACCEPTANCE C9 PASS: select/rank/simulate byte-identical across reruns; 100 mask round-trips lossless");
}

#[test]
fn c10_cardinality_contract() {
    let cases = generate_dataset(100, MASK_DIM, MASK_DIM, 55).unwrap();
    let backend = SyntheticBackend::new(&cases);
    let pool = backend.pool();
    let report = run_selection(&pool, 3, 7, &backend, 8, ScoreConfig::default()).unwrap();
    assert_eq!(report.selection.len(), 21, "k=3, T=7 must select 21 cases");

    let counted: Vec<_> = report.subsets.iter().filter(|s| s.counted).collect();
    assert_eq!(counted.len(), 7);
    let mut seen = std::collections::BTreeSet::new();
    for subset in &counted {
        assert_eq!(subset.cases.len(), 3);
        for case in &subset.cases {
            assert!(seen.insert(case.clone()), "case {case} selected twice");
        }
    }
    println!("ACCEPTANCE C10 PASS: 7 iterations at k=3 selected exactly 21 distinct cases in 7 disjoint triples");
}
