use alloc::vec::Vec;

use crate::model::{DenseMatrix, WeightId};

use super::AdapterPair;

/// Thin singular value decomposition `M = U * diag(sigma) * Vt` with
/// singular values sorted descending. `U` is `m x p`, `Vt` is `p x n`,
/// `p = min(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub vt: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvdError {
    #[error("matrices have different shapes")]
    ShapeMismatch,
    #[error("rank {rank} exceeds min dimension {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("alpha must be positive")]
    BadAlpha,
    #[error("Jacobi sweeps did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

/// One-sided Jacobi SVD: orthogonalize column pairs of the (possibly
/// transposed) matrix until every pair's inner product is below `tol`
/// relative to the column norms. Deterministic cyclic sweep order, no
/// randomness; plenty accurate at the matrix sizes adapters deal in.
pub fn jacobi_svd(matrix: &DenseMatrix, tol: f64, max_sweeps: usize) -> Result<Svd, SvdError> {
    let transposed = matrix.rows() < matrix.cols();
    let work = if transposed {
        matrix.transpose()
    } else {
        matrix.clone()
    };
    let (m, n) = (work.rows(), work.cols());

    // Column-major copies keep the rotations cache-friendly and simple.
    let mut g: Vec<Vec<f64>> = (0..n).map(|c| (0..m).map(|r| work.get(r, c)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut col = alloc::vec![0.0; n];
            col[c] = 1.0;
            col
        })
        .collect();

    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let (mut a, mut b, mut d) = (0.0f64, 0.0f64, 0.0f64);
                for r in 0..m {
                    a += g[i][r] * g[i][r];
                    b += g[j][r] * g[j][r];
                    d += g[i][r] * g[j][r];
                }
                if d * d <= tol * tol * a * b {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * d);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for r in 0..m {
                    let gi = g[i][r];
                    let gj = g[j][r];
                    g[i][r] = c * gi - s * gj;
                    g[j][r] = s * gi + c * gj;
                }
                for r in 0..n {
                    let vi = v[i][r];
                    let vj = v[j][r];
                    v[i][r] = c * vi - s * vj;
                    v[j][r] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SvdError::NoConvergence { sweeps: max_sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = g
        .iter()
        .map(|col| libm::sqrt(col.iter().map(|x| x * x).sum::<f64>()))
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(core::cmp::Ordering::Equal).then(x.cmp(&y)));

    let mut u = DenseMatrix::zeros(m, n);
    let mut vt = DenseMatrix::zeros(n, n);
    let mut sigma = alloc::vec![0.0; n];
    for (k, &c) in order.iter().enumerate() {
        sigma[k] = norms[c];
        if norms[c] > 0.0 {
            for r in 0..m {
                u.set(r, k, g[c][r] / norms[c]);
            }
        }
        for r in 0..n {
            vt.set(k, r, v[c][r]);
        }
    }

    if transposed {
        // work = matrixᵀ = U Σ Vᵀ, so matrix = V Σ Uᵀ.
        Ok(Svd {
            u: vt.transpose(),
            sigma,
            vt: u.transpose(),
        })
    } else {
        Ok(Svd {
            u,
            sigma,
            vt,
        })
    }
}

/// Compress the delta between a trained and a base weight matrix into a
/// rank-`r` adapter pair.
///
/// Returns `B = (rank / alpha) * U_r * Sigma_r` and `A = Vt_r`, so the
/// effective delta `(alpha / rank) * B * A` equals the rank-`r` truncation
/// of `trained - base` — the best rank-`r` approximation in Frobenius norm,
/// with error equal to the energy of the discarded singular values.
pub fn decompose_delta(
    w_base: &DenseMatrix,
    w_trained: &DenseMatrix,
    target: WeightId,
    rank: usize,
    alpha: f64,
) -> Result<AdapterPair, SvdError> {
    if w_base.rows() != w_trained.rows() || w_base.cols() != w_trained.cols() {
        return Err(SvdError::ShapeMismatch);
    }
    let max = w_base.rows().min(w_base.cols());
    if rank == 0 || rank > max {
        return Err(SvdError::RankTooLarge { rank, max });
    }
    if !(alpha > 0.0) {
        return Err(SvdError::BadAlpha);
    }

    let delta_values: Vec<f64> = w_trained
        .values()
        .iter()
        .zip(w_base.values().iter())
        .map(|(t, b)| t - b)
        .collect();
    let delta = DenseMatrix::from_values(w_base.rows(), w_base.cols(), delta_values)
        .expect("difference of finite matrices is finite");

    let svd = jacobi_svd(&delta, 1e-10, 100)?;
    let inv_scale = rank as f64 / alpha;
    let mut b = DenseMatrix::zeros(delta.rows(), rank);
    for r in 0..delta.rows() {
        for k in 0..rank {
            b.set(r, k, inv_scale * svd.u.get(r, k) * svd.sigma[k]);
        }
    }
    let mut a = DenseMatrix::zeros(rank, delta.cols());
    for k in 0..rank {
        for c in 0..delta.cols() {
            a.set(k, c, svd.vt.get(k, c));
        }
    }
    Ok(AdapterPair { target, a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn reconstruction_error(delta: &DenseMatrix, pair: &AdapterPair, scale: f64) -> f64 {
        let approx = pair.delta(scale);
        let mut sum = 0.0;
        for (d, a) in delta.values().iter().zip(approx.values().iter()) {
            sum += (d - a) * (d - a);
        }
        libm::sqrt(sum)
    }

    #[test]
    fn exact_rank_one_delta_reconstructs() {
        // delta = u vᵀ with u = [1,2,3], v = [1,-1,0,2].
        let u = [1.0, 2.0, 3.0];
        let v = [1.0, -1.0, 0.0, 2.0];
        let mut values = Vec::new();
        for uu in u {
            for vv in v {
                values.push(uu * vv);
            }
        }
        let delta = DenseMatrix::from_values(3, 4, values).unwrap();
        let base = DenseMatrix::zeros(3, 4);
        let pair = decompose_delta(&base, &delta, WeightId::Hidden, 1, 1.0).unwrap();
        assert!(reconstruction_error(&delta, &pair, 1.0) < 1e-8);
    }

    #[test]
    fn zero_delta_gives_zero_adapter() {
        let base = DenseMatrix::from_values(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let pair = decompose_delta(&base, &base, WeightId::Output, 2, 32.0).unwrap();
        let d = pair.delta(32.0 / 2.0);
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_and_rank_validation() {
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(3, 2);
        assert_eq!(
            decompose_delta(&a, &b, WeightId::Hidden, 1, 1.0),
            Err(SvdError::ShapeMismatch)
        );
        assert_eq!(
            decompose_delta(&a, &a, WeightId::Hidden, 3, 1.0),
            Err(SvdError::RankTooLarge { rank: 3, max: 2 })
        );
    }

    #[test]
    fn singular_values_sorted_and_orthonormal_u() {
        let m = DenseMatrix::from_values(
            4,
            3,
            vec![
                2.0, -1.0, 0.5, 0.0, 3.0, 1.0, -2.0, 0.0, 4.0, 1.0, 1.0, -1.0,
            ],
        )
        .unwrap();
        let svd = jacobi_svd(&m, 1e-12, 100).unwrap();
        for pair in svd.sigma.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
        // Uᵀ U = I on nonzero columns.
        for i in 0..3 {
            for j in 0..3 {
                let mut dot = 0.0;
                for r in 0..4 {
                    dot += svd.u.get(r, i) * svd.u.get(r, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-9, "U column pair ({i},{j})");
            }
        }
        // Reconstruction U Σ Vᵀ == M.
        for r in 0..4 {
            for c in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += svd.u.get(r, k) * svd.sigma[k] * svd.vt.get(k, c);
                }
                assert!((acc - m.get(r, c)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn wide_matrices_are_handled_by_transposition() {
        let m = DenseMatrix::from_values(2, 4, vec![1.0, 0.0, 2.0, -1.0, 0.5, 3.0, 0.0, 1.0]).unwrap();
        let svd = jacobi_svd(&m, 1e-12, 100).unwrap();
        assert_eq!(svd.u.rows(), 2);
        assert_eq!(svd.vt.cols(), 4);
        for r in 0..2 {
            for c in 0..4 {
                let mut acc = 0.0;
                for k in 0..svd.sigma.len() {
                    acc += svd.u.get(r, k) * svd.sigma[k] * svd.vt.get(k, c);
                }
                assert!((acc - m.get(r, c)).abs() < 1e-9);
            }
        }
    }
}
