use num_complex::Complex;

use super::Matrix;
use crate::scalar::Real;

/// Determinant by LU with partial pivoting.
pub(crate) fn lu_determinant<T: Real>(m: &Matrix<T>) -> Complex<T> {
    let n = m.rows();
    let mut a = m.clone();
    let mut det = Complex::new(T::one(), T::zero());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| {
                a[(x, col)]
                    .norm()
                    .partial_cmp(&a[(y, col)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[(pivot, col)].norm() == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        if pivot != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(pivot, c)];
                a[(pivot, c)] = tmp;
            }
            det = -det;
        }
        let d = a[(col, col)];
        det *= d;
        for r in (col + 1)..n {
            let f = a[(r, col)] / d;
            for c in col..n {
                let sub = f * a[(col, c)];
                a[(r, c)] -= sub;
            }
        }
    }
    det
}

/// Modified Gram-Schmidt QR of a square matrix. `R` has a non-negative real
/// diagonal; a dependent column leaves a zero column in `Q`.
pub(crate) fn qr_gram_schmidt<T: Real>(m: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q = m.clone();
    let mut r = Matrix::zeros(cols, cols);
    for j in 0..cols {
        for i in 0..j {
            let mut dot = Complex::new(T::zero(), T::zero());
            for k in 0..rows {
                dot += q[(k, i)].conj() * q[(k, j)];
            }
            r[(i, j)] = dot;
            for k in 0..rows {
                let sub = dot * q[(k, i)];
                q[(k, j)] -= sub;
            }
        }
        let norm = (0..rows).map(|k| q[(k, j)].norm_sqr()).sum::<T>().sqrt();
        r[(j, j)] = Complex::new(norm, T::zero());
        for k in 0..rows {
            q[(k, j)] = if norm > T::zero() {
                q[(k, j)] / norm
            } else {
                Complex::new(T::zero(), T::zero())
            };
        }
    }
    (q, r)
}

/// Square unitary whose leading columns are the given orthonormal vectors,
/// completed with Gram-Schmidt over the standard basis.
pub(crate) fn complete_basis<T: Real>(vectors: &[Vec<Complex<T>>], n: usize) -> Matrix<T> {
    let mut cols: Vec<Vec<Complex<T>>> = vectors.to_vec();
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut cand = vec![Complex::new(T::zero(), T::zero()); n];
        cand[e] = Complex::new(T::one(), T::zero());
        e += 1;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for c in &cols {
                let dot = c
                    .iter()
                    .zip(&cand)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
                        acc + x.conj() * y
                    });
                for (y, x) in cand.iter_mut().zip(c) {
                    *y -= dot * x;
                }
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::of(1e-3) {
            cols.push(cand.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut out = Matrix::zeros(n, n);
    for (c, v) in cols.iter().enumerate() {
        out.set_col(c, v);
    }
    out
}
