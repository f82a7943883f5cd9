//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Each sweep visits every off-diagonal entry (p, q) and applies a plane
//! rotation that zeroes it; the accumulated rotations form the eigenvector
//! matrix. Convergence is quadratic once the off-diagonal mass is small, so a
//! handful of sweeps suffices for the matrix orders used here (M up to a few
//! hundred).

use crate::error::{Error, Result};
use crate::numerics::Mat;

/// Off-diagonal sweep threshold, relative to the matrix magnitude.
const SWEEP_TOLERANCE: f64 = 1e-12;

/// Input asymmetry beyond this is rejected rather than silently symmetrized.
const ASYMMETRY_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted in non-increasing order; `eigenvectors` holds the
/// matching orthonormal eigenvectors as columns. Each eigenvector's sign is
/// fixed so that its largest-magnitude entry is positive, which makes the
/// decomposition reproducible across runs.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

impl SymmetricSpectrum {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector paired with `eigenvalues[index]`.
    pub fn eigenvector(&self, index: usize) -> Vec<f64> {
        self.eigenvectors.column(index)
    }
}

/// Decompose a symmetric matrix into eigenvalues and orthonormal
/// eigenvectors.
///
/// Rejects non-square input and asymmetry above `1e-12`.
pub fn eig_sym(matrix: &Mat) -> Result<SymmetricSpectrum> {
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let (row, col, deviation) = matrix.max_asymmetry();
    if deviation > ASYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric {
            row,
            col,
            deviation,
        });
    }

    let n = matrix.rows();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }

    let mut a = matrix.clone();
    let mut v = Mat::identity(n);
    let tol = SWEEP_TOLERANCE * matrix.max_abs().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].abs())
            .sum();
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        // One final check: the last sweep may have finished the job.
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].abs())
            .sum();
        if off > tol {
            return Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    // Sort eigenpairs by descending eigenvalue.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);

    // Sign convention: largest-magnitude entry of each column positive.
    for c in 0..n {
        let mut best = 0;
        for r in 1..n {
            if eigenvectors[(r, c)].abs() > eigenvectors[(best, c)].abs() {
                best = r;
            }
        }
        if eigenvectors[(best, c)] < 0.0 {
            for r in 0..n {
                eigenvectors[(r, c)] = -eigenvectors[(r, c)];
            }
        }
    }

    Ok(SymmetricSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation zeroing `a[(p, q)]`, accumulated into `v`.
fn rotate(a: &mut Mat, v: &mut Mat, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    // Smaller-magnitude root of t^2 + 2 t theta - 1 = 0 keeps the rotation
    // angle below pi/4, which is what makes cyclic Jacobi stable.
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    let app = a[(p, p)];
    let aqq = a[(q, q)];
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for j in 0..n {
        if j != p && j != q {
            let ajp = a[(j, p)];
            let ajq = a[(j, q)];
            let new_jp = ajp - s * (ajq + tau * ajp);
            let new_jq = ajq + s * (ajp - tau * ajq);
            a[(j, p)] = new_jp;
            a[(p, j)] = new_jp;
            a[(j, q)] = new_jq;
            a[(q, j)] = new_jq;
        }
    }
    for j in 0..n {
        let vjp = v[(j, p)];
        let vjq = v[(j, q)];
        v[(j, p)] = vjp - s * (vjq + tau * vjp);
        v[(j, q)] = vjq + s * (vjp - tau * vjq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomStream;

    fn residual(a: &Mat, spectrum: &SymmetricSpectrum) -> f64 {
        let n = a.rows();
        let mut worst = 0.0f64;
        for j in 0..n {
            let u = spectrum.eigenvector(j);
            let au = a.matvec(&u);
            let lambda = spectrum.eigenvalues[j];
            for r in 0..n {
                worst = worst.max((au[r] - lambda * u[r]).abs() / lambda.abs().max(1.0));
            }
        }
        worst
    }

    fn orthonormality_defect(spectrum: &SymmetricSpectrum) -> f64 {
        let n = spectrum.order();
        let mut worst = 0.0f64;
        for p in 0..n {
            let up = spectrum.eigenvector(p);
            for j in 0..n {
                let uj = spectrum.eigenvector(j);
                let dot: f64 = up.iter().zip(&uj).map(|(a, b)| a * b).sum();
                let expect = if p == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expect).abs());
            }
        }
        worst
    }

    #[test]
    fn identity_eigenvalues_are_ones() {
        let spectrum = eig_sym(&Mat::identity(3)).unwrap();
        for lambda in &spectrum.eigenvalues {
            assert!((lambda - 1.0).abs() < 1e-14);
        }
        assert!(orthonormality_defect(&spectrum) < 1e-9);
    }

    #[test]
    fn rank_one_projector() {
        // (1/4) * ones(4x4): eigenvalues (1, 0, 0, 0), leading eigenvector
        // (1/2, 1/2, 1/2, 1/2).
        let a = Mat::from_fn(4, 4, |_, _| 0.25);
        let spectrum = eig_sym(&a).unwrap();
        assert!((spectrum.eigenvalues[0] - 1.0).abs() < 1e-12);
        for p in 1..4 {
            assert!(spectrum.eigenvalues[p].abs() < 1e-12);
        }
        let lead = spectrum.eigenvector(0);
        for entry in lead {
            assert!((entry - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn path3_consensus_matrix_eigenvalues() {
        // P for the 3-node path with kappa = 1, d_max = 2: the Laplacian
        // spectrum {0, 1, 3} maps to 1 - 0.5 * {0, 1, 3} = {1, 0.5, -0.5}.
        let p = Mat::from_rows(&[&[0.5, 0.5, 0.0], &[0.5, 0.0, 0.5], &[0.0, 0.5, 0.5]]);
        let spectrum = eig_sym(&p).unwrap();
        let expect = [1.0, 0.5, -0.5];
        for (lambda, e) in spectrum.eigenvalues.iter().zip(expect) {
            assert!((lambda - e).abs() < 1e-12, "{lambda} vs {e}");
        }
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[2.1, 1.0]]);
        assert!(matches!(eig_sym(&a), Err(Error::NotSymmetric { .. })));
        let b = Mat::zeros(2, 3);
        assert!(matches!(eig_sym(&b), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn reconstruction_on_random_symmetric_matrices() {
        // U diag(lambda) U^T must reproduce the input entrywise within 1e-8
        // for orders up to 50.
        let mut stream = RandomStream::new(7);
        for n in [2usize, 5, 13, 50] {
            let mut a = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let x = 2.0 * stream.next_f64() - 1.0;
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            let spectrum = eig_sym(&a).unwrap();
            assert!(
                residual(&a, &spectrum) < 1e-9,
                "residual too large at n={n}"
            );
            assert!(orthonormality_defect(&spectrum) < 1e-9);
            for i in 0..n {
                for j in 0..n {
                    let recon: f64 = (0..n)
                        .map(|p| {
                            spectrum.eigenvalues[p]
                                * spectrum.eigenvectors[(i, p)]
                                * spectrum.eigenvectors[(j, p)]
                        })
                        .sum();
                    assert!(
                        (recon - a[(i, j)]).abs() < 1e-8,
                        "reconstruction off at ({i},{j}), n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvalues_sorted_descending() {
        let a = Mat::from_rows(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 2.0], &[3.0, 2.0, 2.0]]);
        let spectrum = eig_sym(&a).unwrap();
        for w in spectrum.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }
}
