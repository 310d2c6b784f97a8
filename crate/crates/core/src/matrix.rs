//! Pairwise-agreement matrices and their spectral summaries.
//!
//! A [`DiceMatrix`] is the t×t symmetric matrix of pairwise overlap scores
//! among t segmentations of one case: unit diagonal, entries in [0, 1].
//! Matrices built from real masks are positive semidefinite (the matrix is an
//! entrywise product of a Gram matrix and a Cauchy matrix, both PSD, so the
//! Schur product theorem applies); hand-built matrices need not be, which is
//! exactly what [`DiceMatrix::is_psd`] and [`trio_feasibility`] probe.
//!
//! The principal eigenvalue is the disagreement score: it equals t under full
//! agreement and shrinks toward 1 as the ensemble diverges. The Von Neumann
//! entropy of the spectrum moves the opposite way; both are provided.

use crate::jacobi::{self, JacobiError};
use crate::mask::{BinaryMask, MaskError, OverlapMetric};
use thiserror::Error;

/// Matrices with an eigenvalue below `-PSD_TOLERANCE` are treated as not PSD.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Slack for the trio feasibility inequality; equality occurs at legitimate
/// boundary cases (identical segmentations), so the test is non-strict.
pub const TRIO_TOLERANCE: f64 = 1e-9;

/// Eigenvalues within the solver's resolution of zero (this factor times the
/// matrix order, mirroring the convergence threshold) are snapped to exactly
/// zero before entropy-style functionals, so `0·log 0 = 0` holds exactly.
pub const ZERO_SNAP: f64 = 1e-12;

const DEGENERATE_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("an agreement matrix needs at least 2 members, got {got}")]
    TooFewMembers { got: usize },
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("entry buffer holds {actual} values, expected {expected} for order {order}")]
    BadEntryCount {
        order: usize,
        expected: usize,
        actual: usize,
    },
    #[error("matrix is not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("diagonal entry {index} is {value}, must be exactly 1")]
    DiagonalNotUnit { index: usize, value: f64 },
    #[error("entry ({row},{col}) is {value}, outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("spectrum has non-positive trace, normalized entropy undefined")]
    ZeroTrace,
    #[error("overlap score {value} is outside [0, 1]")]
    ScoreOutOfRange { value: f64 },
}

/// Symmetric matrix of pairwise overlap scores with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiceMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl DiceMatrix {
    /// Validates order ≥ 2, exact symmetry, unit diagonal and entry range.
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self, MatrixError> {
        if order < 2 {
            return Err(MatrixError::TooFewMembers { got: order });
        }
        let expected = order * order;
        if entries.len() != expected {
            return Err(MatrixError::BadEntryCount {
                order,
                expected,
                actual: entries.len(),
            });
        }
        for p in 0..order {
            let d = entries[p * order + p];
            if d != 1.0 {
                return Err(MatrixError::DiagonalNotUnit { index: p, value: d });
            }
            for q in (p + 1)..order {
                let e = entries[p * order + q];
                if e != entries[q * order + p] {
                    return Err(MatrixError::NotSymmetric { row: p, col: q });
                }
                if !(0.0..=1.0).contains(&e) {
                    return Err(MatrixError::EntryOutOfRange {
                        row: p,
                        col: q,
                        value: e,
                    });
                }
            }
        }
        Ok(Self { order, entries })
    }

    /// Builds the pairwise matrix over `segmentations` with the chosen metric.
    /// The diagonal is set to exactly 1 and each pair is scored once.
    pub fn from_masks(
        segmentations: &[BinaryMask],
        metric: OverlapMetric,
    ) -> Result<Self, MatrixError> {
        let t = segmentations.len();
        if t < 2 {
            return Err(MatrixError::TooFewMembers { got: t });
        }
        let mut entries = vec![0.0; t * t];
        for p in 0..t {
            entries[p * t + p] = 1.0;
            for q in (p + 1)..t {
                let s = metric.score(&segmentations[p], &segmentations[q])?;
                entries[p * t + q] = s;
                entries[q * t + p] = s;
            }
        }
        Ok(Self { order: t, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, p: usize, q: usize) -> f64 {
        self.entries[p * self.order + q]
    }

    /// Row-major entry buffer.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Full spectrum, sorted descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, MatrixError> {
        Ok(jacobi::symmetric_eigenvalues(self.order, &self.entries)?)
    }

    /// Largest eigenvalue. For any valid matrix this lies in [1, t]: the
    /// top eigenvalue is at least the mean diagonal entry and at most the
    /// largest row sum.
    pub fn lambda_max(&self) -> Result<f64, MatrixError> {
        Ok(self.eigenvalues()?[0])
    }

    /// True iff the minimum eigenvalue is ≥ `-tolerance`.
    pub fn is_psd(&self, tolerance: f64) -> Result<bool, MatrixError> {
        let eigs = self.eigenvalues()?;
        Ok(eigs[eigs.len() - 1] >= -tolerance)
    }

    /// Spectrum plus both entropy variants. Errors if the matrix is not PSD
    /// within [`PSD_TOLERANCE`] (entropy is undefined there).
    pub fn spectral_summary(&self) -> Result<SpectralSummary, MatrixError> {
        let eigenvalues = self.eigenvalues()?;
        let entropy_raw = von_neumann_entropy(&eigenvalues, false)?;
        let entropy_normalized = von_neumann_entropy(&eigenvalues, true)?;
        Ok(SpectralSummary {
            lambda_max: eigenvalues[0],
            entropy_raw,
            entropy_normalized,
            eigenvalues,
        })
    }
}

/// Spectral view of one agreement matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Sorted descending; sums to the matrix order within solver tolerance.
    pub eigenvalues: Vec<f64>,
    /// `eigenvalues[0]`.
    pub lambda_max: f64,
    /// −Σ λ·ln λ over the raw spectrum (negative when λ₁ > 1).
    pub entropy_raw: f64,
    /// Entropy of the spectrum divided by its trace, so it sums to 1.
    pub entropy_normalized: f64,
}

/// Clamp a spectrum for entropy-style functionals: eigenvalues within
/// [`ZERO_SNAP`] of zero become exactly zero, anything below
/// `-PSD_TOLERANCE` is an error.
fn clamped_spectrum(eigenvalues: &[f64]) -> Result<Vec<f64>, MatrixError> {
    if let Some(&min) = eigenvalues
        .iter()
        .min_by(|a, b| a.total_cmp(b))
        .filter(|&&m| m < -PSD_TOLERANCE)
    {
        return Err(MatrixError::NotPsd {
            min_eigenvalue: min,
        });
    }
    let snap = ZERO_SNAP * eigenvalues.len().max(1) as f64;
    Ok(eigenvalues
        .iter()
        .map(|&l| if l.abs() <= snap || l < 0.0 { 0.0 } else { l })
        .collect())
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Von Neumann entropy −Σ λ·ln λ of a PSD-clamped spectrum (natural log,
/// `0·log 0 = 0`). In normalized mode each eigenvalue is first divided by the
/// trace so the spectrum sums to 1.
pub fn von_neumann_entropy(eigenvalues: &[f64], normalized: bool) -> Result<f64, MatrixError> {
    let spectrum = clamped_spectrum(eigenvalues)?;
    if normalized {
        let trace: f64 = spectrum.iter().sum();
        if trace <= ZERO_SNAP {
            return Err(MatrixError::ZeroTrace);
        }
        Ok(-spectrum.iter().map(|&l| xlogx(l / trace)).sum::<f64>())
    } else {
        Ok(-spectrum.iter().map(|&l| xlogx(l)).sum::<f64>())
    }
}

/// Share of the spectrum's Shannon information carried by the top eigenvalue:
/// λ₁·ln λ₁ / Σ λ·ln λ. Returns `None` when the denominator is degenerate
/// (|Σ λ·ln λ| below tolerance, e.g. the identity spectrum).
pub fn dominance_ratio(eigenvalues: &[f64]) -> Result<Option<f64>, MatrixError> {
    let spectrum = clamped_spectrum(eigenvalues)?;
    let top = match spectrum.iter().copied().max_by(f64::total_cmp) {
        Some(top) => top,
        None => return Ok(None),
    };
    let denominator: f64 = spectrum.iter().map(|&l| xlogx(l)).sum();
    if denominator.abs() < DEGENERATE_DENOMINATOR {
        return Ok(None);
    }
    Ok(Some(xlogx(top) / denominator))
}

/// Whether three pairwise scores can coexist in one agreement matrix:
/// d₁² + d₂² + d₃² − 1 ≤ 2·d₁·d₂·d₃ (the determinant of the 3×3 unit-diagonal
/// matrix is nonnegative), non-strict with [`TRIO_TOLERANCE`].
pub fn trio_feasibility(d_pq: f64, d_qr: f64, d_rp: f64) -> Result<bool, MatrixError> {
    for &d in &[d_pq, d_qr, d_rp] {
        if !(0.0..=1.0).contains(&d) {
            return Err(MatrixError::ScoreOutOfRange { value: d });
        }
    }
    let lhs = d_pq * d_pq + d_qr * d_qr + d_rp * d_rp - 1.0;
    let rhs = 2.0 * d_pq * d_qr * d_rp;
    Ok(lhs <= rhs + TRIO_TOLERANCE)
}
