//! Feasible agreement-matrix sampling and the eigenvalue-dominance
//! simulation.
//!
//! A symmetric unit-diagonal matrix with entries `1 - δ`, `δ ∈ [0, ε]`, is
//! realizable as pairwise overlap scores only if it is positive semidefinite;
//! in particular every off-diagonal trio must satisfy the determinant
//! constraint checked by [`crate::matrix::trio_feasibility`]. Rejection
//! sampling of independent deltas collapses for ensembles beyond a dozen
//! members (the per-trio acceptance rate is a scale-free ~5/6, so the
//! whole-matrix rate decays like (5/6)^C(t,3), and independent deltas are not
//! PSD at large t anyway), so the sampler here constructs matrices that are
//! feasible by geometry instead: the Gram matrix of t unit vectors drawn
//! inside a spherical cap in R⁴ whose half-angle φ satisfies cos 2φ = 1 − ε.
//! Any two vectors in the cap have dot product in [1 − ε, 1], a Gram matrix
//! is PSD by construction, and ε = 0 degenerates to the all-ones matrix.
//!
//! The simulation then measures how much of the spectrum's Shannon
//! information the principal eigenvalue carries as the ensemble grows.

use crate::matrix::{dominance_ratio, trio_feasibility, DiceMatrix};
use crate::seeds;
use crate::synth::SynthError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PURPOSE_TRIAL: u64 = 0x20;

/// Uniform unit vector in R³ (Marsaglia rejection from the cube).
fn unit3(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        let z = 2.0 * rng.random::<f64>() - 1.0;
        let n2 = x * x + y * y + z * z;
        if n2 > 1e-12 && n2 <= 1.0 {
            let n = n2.sqrt();
            return [x / n, y / n, z / n];
        }
    }
}

/// Sample a feasible agreement matrix: unit diagonal, every off-diagonal
/// entry `1 - δ` with `δ ∈ [0, epsilon]`, PSD, every trio feasible.
pub fn sample_feasible_dice_matrix(
    t: usize,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<DiceMatrix, SynthError> {
    if t < 2 {
        return Err(SynthError::BadOrder { value: t });
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(SynthError::BadEpsilon { value: epsilon });
    }
    if epsilon == 0.0 {
        return Ok(DiceMatrix::new(t, vec![1.0; t * t])?);
    }

    // cap half-angle: two vectors at polar angles ≤ φ can differ by at most
    // 2φ, and cos 2φ = 1 − 2 sin²φ = 1 − ε
    let cap = (epsilon / 2.0).sqrt().asin();
    let mut vectors = Vec::with_capacity(t);
    for _ in 0..t {
        // sqrt spreads the polar angles toward the cap boundary, giving the
        // deltas a broad spread over [0, ε]
        let phi = cap * rng.random::<f64>().sqrt();
        let w = unit3(rng);
        let (sin, cos) = phi.sin_cos();
        vectors.push([cos, sin * w[0], sin * w[1], sin * w[2]]);
    }

    let mut entries = vec![1.0; t * t];
    for p in 0..t {
        for q in (p + 1)..t {
            let dot: f64 = (0..4).map(|i| vectors[p][i] * vectors[q][i]).sum();
            let value = dot.clamp(1.0 - epsilon, 1.0);
            entries[p * t + q] = value;
            entries[q * t + p] = value;
        }
    }
    let matrix = DiceMatrix::new(t, entries)?;

    // every trio must satisfy the determinant bound even after rounding
    for p in 0..t {
        for q in (p + 1)..t {
            for r in (q + 1)..t {
                if !trio_feasibility(matrix.entry(p, q), matrix.entry(q, r), matrix.entry(r, p))? {
                    return Err(SynthError::Infeasible { t, epsilon });
                }
            }
        }
    }
    Ok(matrix)
}

/// Parameters for [`run_conjecture_simulation`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Ensemble sizes to sample, each ≥ 2.
    pub t_values: Vec<usize>,
    /// Perturbation bound in [0, 1].
    pub epsilon: f64,
    /// Matrices per ensemble size, ≥ 1.
    pub trials: usize,
    pub seed: u64,
}

impl SimulationConfig {
    fn validate(&self) -> Result<(), SynthError> {
        if self.t_values.is_empty() {
            return Err(SynthError::NoSizes);
        }
        if let Some(&bad) = self.t_values.iter().find(|&&t| t < 2) {
            return Err(SynthError::BadOrder { value: bad });
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(SynthError::BadEpsilon {
                value: self.epsilon,
            });
        }
        if self.trials == 0 {
            return Err(SynthError::NoTrials);
        }
        Ok(())
    }
}

/// Aggregate dominance-ratio statistics for one ensemble size. A cell with
/// no defined ratios at all (every spectrum degenerate) is marked by `None`
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub t: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub mean_ratio: Option<f64>,
    pub stdev_ratio: Option<f64>,
    /// Trials whose spectrum had a degenerate information denominator.
    pub undefined: usize,
}

/// Output table of [`run_conjecture_simulation`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTable {
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<SimRow>,
}

/// For each ensemble size, sample `trials` feasible matrices and aggregate
/// the dominance ratio λ₁·ln λ₁ / Σ λ·ln λ of their spectra. Each (t, trial)
/// pair draws from its own derived stream, so the table is a pure function of
/// the config.
pub fn run_conjecture_simulation(config: &SimulationConfig) -> Result<SimulationTable, SynthError> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.t_values.len());
    for &t in &config.t_values {
        let mut ratios = Vec::with_capacity(config.trials);
        let mut undefined = 0;
        for trial in 0..config.trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::combine(
                seeds::combine(seeds::combine(config.seed, PURPOSE_TRIAL), t as u64),
                trial as u64,
            ));
            let matrix = sample_feasible_dice_matrix(t, config.epsilon, &mut rng)?;
            let eigenvalues = matrix.eigenvalues()?;
            match dominance_ratio(&eigenvalues)? {
                Some(ratio) => ratios.push(ratio),
                None => undefined += 1,
            }
        }
        let (mean_ratio, stdev_ratio) = if ratios.is_empty() {
            (None, None)
        } else {
            let n = ratios.len() as f64;
            let mean = ratios.iter().sum::<f64>() / n;
            let variance = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
            (Some(mean), Some(variance.sqrt()))
        };
        rows.push(SimRow {
            t,
            epsilon: config.epsilon,
            trials: config.trials,
            mean_ratio,
            stdev_ratio,
            undefined,
        });
    }
    Ok(SimulationTable {
        epsilon: config.epsilon,
        trials: config.trials,
        seed: config.seed,
        rows,
    })
}
