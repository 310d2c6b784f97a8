//! Cyclic Jacobi eigensolver for dense real symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair (p, q) in row order and applies
//! the plane rotation that annihilates that entry (Golub & Van Loan §8.5).
//! Convergence is declared when the Frobenius norm of the off-diagonal part
//! drops below `1e-12 * n`. All matrices in this crate have order ≤ 64, where
//! Jacobi is robust and gives the full spectrum.

use thiserror::Error;

/// Off-diagonal Frobenius norm threshold is `CONVERGENCE_FACTOR * n`.
pub const CONVERGENCE_FACTOR: f64 = 1e-12;

/// Sweep cap; symmetric matrices of order ≤ 64 converge in well under this.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum JacobiError {
    #[error("matrix buffer holds {len} entries, expected {n}x{n}")]
    BadLength { n: usize, len: usize },
    #[error(
        "eigensolver did not converge: off-diagonal residual {residual:e} after {sweeps} sweeps (threshold {threshold:e})"
    )]
    NotConverged {
        residual: f64,
        sweeps: usize,
        threshold: f64,
    },
}

/// Full real spectrum of a symmetric matrix, sorted descending.
///
/// `matrix` is row-major `n*n`; only symmetric inputs are meaningful (the
/// lower triangle is read as the mirror of the upper one).
pub fn symmetric_eigenvalues(n: usize, matrix: &[f64]) -> Result<Vec<f64>, JacobiError> {
    eigenvalues_capped(n, matrix, MAX_SWEEPS)
}

pub(crate) fn eigenvalues_capped(
    n: usize,
    matrix: &[f64],
    max_sweeps: usize,
) -> Result<Vec<f64>, JacobiError> {
    if matrix.len() != n * n {
        return Err(JacobiError::BadLength {
            n,
            len: matrix.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![matrix[0]]);
    }

    let mut a = matrix.to_vec();
    // Work on a symmetrized copy so mildly asymmetric input rounding cannot
    // leak into the rotations.
    for p in 0..n {
        for q in (p + 1)..n {
            let m = 0.5 * (a[p * n + q] + a[q * n + p]);
            a[p * n + q] = m;
            a[q * n + p] = m;
        }
    }

    let threshold = CONVERGENCE_FACTOR * n as f64;
    let mut residual = off_diagonal_norm(n, &a);
    let mut sweeps = 0;
    while residual >= threshold {
        if sweeps >= max_sweeps {
            return Err(JacobiError::NotConverged {
                residual,
                sweeps,
                threshold,
            });
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                rotate(n, &mut a, p, q);
            }
        }
        sweeps += 1;
        residual = off_diagonal_norm(n, &a);
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    // Stable sort keeps solver output order for ties.
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    Ok(eigenvalues)
}

fn off_diagonal_norm(n: usize, a: &[f64]) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += a[p * n + q] * a[p * n + q];
        }
    }
    (2.0 * sum).sqrt()
}

/// One Jacobi rotation annihilating a[p][q].
fn rotate(n: usize, a: &mut [f64], p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
    // Smaller root of t^2 + 2*theta*t - 1 = 0; for huge theta the closed form
    // would overflow in theta^2, so fall back to the first-order root.
    let t = if theta.abs() > 1e10 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    a[p * n + p] -= t * apq;
    a[q * n + q] += t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for j in 0..n {
        if j == p || j == q {
            continue;
        }
        let ajp = a[j * n + p];
        let ajq = a[j * n + q];
        let new_p = c * ajp - s * ajq;
        let new_q = s * ajp + c * ajq;
        a[j * n + p] = new_p;
        a[p * n + j] = new_p;
        a[j * n + q] = new_q;
        a[q * n + j] = new_q;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_spectrum(n: usize, m: &[f64], expected: &[f64], tol: f64) {
        let eigs = symmetric_eigenvalues(n, m).unwrap();
        assert_eq!(eigs.len(), expected.len());
        for (got, want) in eigs.iter().zip(expected) {
            assert!(
                (got - want).abs() <= tol,
                "eigenvalue {got} != {want} (tol {tol})"
            );
        }
    }

    fn all_ones(n: usize) -> Vec<f64> {
        vec![1.0; n * n]
    }

    fn identity(n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        m
    }

    #[test]
    fn ones_matrix_spectrum() {
        for n in 2..=20 {
            let mut expected = vec![0.0; n];
            expected[0] = n as f64;
            assert_spectrum(n, &all_ones(n), &expected, 1e-9);
        }
    }

    #[test]
    fn identity_spectrum() {
        for n in 2..=20 {
            assert_spectrum(n, &identity(n), &vec![1.0; n], 1e-9);
        }
    }

    #[test]
    fn two_by_two_analytic() {
        // [[1, d], [d, 1]] has eigenvalues 1 ± d.
        for d in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert_spectrum(2, &[1.0, d, d, 1.0], &[1.0 + d, 1.0 - d], 1e-12);
        }
    }

    #[test]
    fn agreement_conflict_matrix() {
        // Characteristic polynomial (1-x)((1-x)^2 - 2): roots 1 ± √2 and 1.
        let m = [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let r2 = std::f64::consts::SQRT_2;
        assert_spectrum(3, &m, &[1.0 + r2, 1.0, 1.0 - r2], 1e-12);
    }

    #[test]
    fn trace_is_preserved() {
        // deterministic pseudo-random symmetric 12x12
        let n = 12;
        let mut m = vec![0.0; n * n];
        let mut x: u64 = 0x9e3779b97f4a7c15;
        for p in 0..n {
            for q in p..n {
                x = x
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let v = (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
                m[p * n + q] = v;
                m[q * n + p] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
        let eigs = symmetric_eigenvalues(n, &m).unwrap();
        let sum: f64 = eigs.iter().sum();
        assert!((sum - trace).abs() < 1e-9);
    }

    #[test]
    fn converges_at_the_largest_supported_order() {
        let n = 64;
        let mut m = vec![0.0; n * n];
        let mut x: u64 = 0x243f6a8885a308d3;
        for p in 0..n {
            for q in p..n {
                x = x
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let v = (x >> 11) as f64 / (1u64 << 53) as f64;
                m[p * n + q] = v;
                m[q * n + p] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
        let eigs = symmetric_eigenvalues(n, &m).unwrap();
        let sum: f64 = eigs.iter().sum();
        assert!((sum - trace).abs() < 1e-8);
    }

    #[test]
    fn sweep_cap_reports_residual() {
        let m = [1.0, 0.5, 0.5, 1.0];
        let err = eigenvalues_capped(2, &m, 0).unwrap_err();
        match err {
            JacobiError::NotConverged { residual, .. } => assert!(residual > 0.0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_buffer_length() {
        assert!(matches!(
            symmetric_eigenvalues(3, &[1.0; 8]),
            Err(JacobiError::BadLength { n: 3, len: 8 })
        ));
    }
}
