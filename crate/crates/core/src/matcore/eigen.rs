use num_complex::Complex;

use super::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Unitary 2x2 rotation that zeroes the (p, q) entry of the Hermitian block
/// `[[app, apq], [conj(apq), aqq]]`. Returned as `(g_pp, g_pq, g_qp, g_qq)`.
fn rotation<T: Real>(
    app: T,
    aqq: T,
    apq: Complex<T>,
) -> (Complex<T>, Complex<T>, Complex<T>, Complex<T>) {
    let r = apq.norm();
    let phase = apq / r;
    let theta = (aqq - app) / (T::of(2.0) * r);
    let t = if theta >= T::zero() {
        T::one() / (theta + (theta * theta + T::one()).sqrt())
    } else {
        -T::one() / (-theta + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let zero = T::zero();
    (
        Complex::new(c, zero),
        Complex::new(s, zero),
        phase.conj() * (-s),
        phase.conj() * c,
    )
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix. Eigenvalues
/// come back ascending; eigenvectors (columns) only when asked for.
pub(crate) fn jacobi_eigh<T: Real>(
    h: &Matrix<T>,
    want_vectors: bool,
) -> (Vec<T>, Option<Matrix<T>>) {
    let n = h.rows();
    let mut a = h.clone();
    // symmetrize so the rotations see an exactly Hermitian input
    for r in 0..n {
        a[(r, r)] = Complex::new(a[(r, r)].re, T::zero());
        for c in (r + 1)..n {
            let avg = (a[(r, c)] + a[(c, r)].conj()) * T::of(0.5);
            a[(r, c)] = avg;
            a[(c, r)] = avg.conj();
        }
    }
    let mut v = want_vectors.then(|| Matrix::identity(n));
    let scale = a.frobenius();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[(r, c)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale * T::of(1e-2) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() == T::zero() {
                    continue;
                }
                let (gpp, gpq, gqp, gqq) = rotation(a[(p, p)].re, a[(q, q)].re, apq);
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = vkp * gpp + vkq * gqp;
                        v[(k, q)] = vkp * gpq + vkq * gqq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        a[(x, x)]
            .re
            .partial_cmp(&a[(y, y)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| Matrix::from_fn(n, n, |r, c| v[(r, order[c])]));
    (values, vectors)
}

/// One-sided (Hestenes) Jacobi SVD: `m = u * diag(s) * w^dagger`.
///
/// Singular values are descending and `u` holds only the first `min(rows, cols)`
/// left vectors; columns for vanishing singular values are left zero and must
/// be completed by the caller when a full basis is needed.
pub(crate) fn jacobi_svd<T: Real>(m: &Matrix<T>) -> (Matrix<T>, Vec<T>, Matrix<T>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut w = Matrix::identity(cols);
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = Complex::new(T::zero(), T::zero());
                for k in 0..rows {
                    alpha += a[(k, p)].norm_sqr();
                    beta += a[(k, q)].norm_sqr();
                    gamma += a[(k, p)].conj() * a[(k, q)];
                }
                if gamma.norm() <= eps * (alpha * beta).sqrt() || gamma.norm() == T::zero() {
                    continue;
                }
                rotated = true;
                let (gpp, gpq, gqp, gqq) = rotation(alpha, beta, gamma);
                for k in 0..rows {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..cols {
                    let (wkp, wkq) = (w[(k, p)], w[(k, q)]);
                    w[(k, p)] = wkp * gpp + wkq * gqp;
                    w[(k, q)] = wkp * gpq + wkq * gqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = (0..cols)
        .map(|c| (0..rows).map(|k| a[(k, c)].norm_sqr()).sum::<T>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| {
        norms[y]
            .partial_cmp(&norms[x])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let k = rows.min(cols);
    let s: Vec<T> = order.iter().take(k).map(|&i| norms[i]).collect();
    let mut u = Matrix::zeros(rows, k);
    for (c, &src) in order.iter().take(k).enumerate() {
        if norms[src] > T::zero() {
            for r in 0..rows {
                u[(r, c)] = a[(r, src)] / norms[src];
            }
        }
    }
    let w_sorted = Matrix::from_fn(cols, cols, |r, c| w[(r, order[c])]);
    (u, s, w_sorted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut s = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s % 10_000) as f64 / 5_000.0 - 1.0
        };
        Matrix::from_fn(rows, cols, |_, _| Complex::new(next(), next()))
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        for seed in 1..40 {
            let m = pseudo_random(7, 7, seed);
            let h = &m + &m.dagger();
            let (vals, _) = jacobi_eigh(&h, false);
            let sum: f64 = vals.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let (vals, vecs) = jacobi_eigh(&Matrix::<f64>::identity(4), true);
        assert_eq!(vals, vec![1.0; 4]);
        assert_eq!(vecs.unwrap(), Matrix::identity(4));
    }

    #[test]
    fn svd_reconstructs() {
        for (rows, cols) in [(2, 2), (2, 3), (3, 2), (4, 4), (3, 4)] {
            for seed in 0..10 {
                let m = pseudo_random(rows, cols, seed * 31 + rows as u64);
                let (u, s, w) = jacobi_svd(&m);
                let k = s.len();
                let sigma = Matrix::from_fn(k, k, |r, c| {
                    if r == c {
                        Complex::new(s[r], 0.0)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                });
                let w_k = Matrix::from_fn(cols, k, |r, c| w[(r, c)]);
                let back = &(&u * &sigma) * &w_k.dagger();
                assert!(back.max_abs_diff(&m) < 1e-12, "{rows}x{cols}");
                assert!(s.windows(2).all(|p| p[0] >= p[1]));
                assert!(w.unitary_deviation() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_of_rank_one() {
        let v = [Complex::new(0.6f64, 0.0), Complex::new(0.0, 0.8)];
        let m = Matrix::<f64>::outer(&v);
        let (_, s, _) = jacobi_svd(&m);
        assert!((s[0] - 1.0).abs() < 1e-14);
        assert!(s[1].abs() < 1e-14);
    }
}
