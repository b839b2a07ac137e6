//! Dense symmetric linear algebra for metric-sized matrices.
//!
//! The metrics only ever factor h×h Gram matrices with h ≤ a few dozen, so a
//! cyclic Jacobi eigensolver and a plain Cholesky are plenty — no LAPACK
//! linkage needed.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix: `a = v · diag(values) · vᵀ`,
/// eigenvalues ascending, eigenvectors in the columns of `v`.
pub fn eigh(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            context: "symmetric eigendecomposition".into(),
            expected: n,
            actual: a.ncols(),
        });
    }
    let mut m = a.clone();
    let mut v = Array2::eye(n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let tol = 1e-14 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]].abs();
            }
        }
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() < tol / (n * n) as f64 {
                    continue;
                }
                // Classic stable Jacobi rotation angle.
                let tau = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, new]] = v[[k, old]];
        }
    }
    Ok((values, vectors))
}

/// log(det(a)) of a symmetric positive-definite matrix, via Cholesky.
pub fn logdet_spd(a: &Array2<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            context: "Cholesky log-determinant".into(),
            expected: n,
            actual: a.ncols(),
        });
    }
    let mut l = Array2::<f64>::zeros((n, n));
    let mut logdet = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::Degenerate(format!(
                        "matrix not positive definite at pivot {i}"
                    )));
                }
                let root = sum.sqrt();
                l[[i, i]] = root;
                logdet += 2.0 * root.ln();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(logdet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    fn random_spd(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = crate::rng::rng(seed);
        let b = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
        b.t().dot(&b) + Array2::<f64>::eye(n) * 0.1
    }

    #[test]
    fn eigh_reconstructs_matrix() {
        for seed in 0..5 {
            let a = random_spd(6, seed);
            let (values, v) = eigh(&a).unwrap();
            let lam = Array2::from_diag(&values);
            let rebuilt = v.dot(&lam).dot(&v.t());
            for (x, y) in a.iter().zip(rebuilt.iter()) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
            let gram = v.t().dot(&v);
            for i in 0..6 {
                for j in 0..6 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[[i, j]] - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn eigh_known_2x2() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (values, _) = eigh(&a).unwrap();
        assert!((values[0] - 1.0).abs() < 1e-12);
        assert!((values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_ascend() {
        let a = random_spd(8, 42);
        let (values, _) = eigh(&a).unwrap();
        for w in values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn logdet_matches_eigenvalue_sum() {
        for seed in 0..5 {
            let a = random_spd(5, 100 + seed);
            let direct = logdet_spd(&a).unwrap();
            let (values, _) = eigh(&a).unwrap();
            let via_eigs: f64 = values.iter().map(|v| v.ln()).sum();
            assert!((direct - via_eigs).abs() < 1e-9, "{direct} vs {via_eigs}");
        }
    }

    #[test]
    fn logdet_identity_is_zero() {
        let eye = Array2::<f64>::eye(4);
        assert!(logdet_spd(&eye).unwrap().abs() < 1e-15);
    }

    #[test]
    fn logdet_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]]; // eigenvalues 3, -1
        assert!(logdet_spd(&a).is_err());
    }
}
