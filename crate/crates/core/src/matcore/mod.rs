//! Dense complex matrices and the bipartite index algebra.
//!
//! Bipartite operators use a single composite-index convention throughout the
//! crate: the basis ket `|e_i, f_j>` sits at row `i * d_b + j`. The partial
//! transpose acts on subsystem B.

mod decomp;
mod eigen;

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dim_mismatch, Error, Result};
use crate::scalar::Real;

pub(crate) use decomp::{complete_basis, lu_determinant, qr_gram_schmidt};
pub(crate) use eigen::{jacobi_eigh, jacobi_svd};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

/// Dimensions of the two subsystems of a bipartite operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub d_a: usize,
    pub d_b: usize,
}

/// Numerical slack used by verdicts.
///
/// `eig_tol` is an absolute eigenvalue tolerance scaled by
/// `max(1, spectral radius)`; `det_tol` is the one-sided threshold a
/// determinant or expectation value must cross before it counts as negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance<T> {
    pub eig_tol: T,
    pub det_tol: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(eig_tol: T, det_tol: T) -> Result<Self> {
        if !(eig_tol > T::zero() && det_tol > T::zero()) {
            return Err(Error::BadTolerance);
        }
        Ok(Self { eig_tol, det_tol })
    }
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            eig_tol: T::of(T::DEFAULT_EIG_TOL),
            det_tol: T::of(T::DEFAULT_DET_TOL),
        }
    }
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a < 2 || d_b < 2 {
            return Err(Error::BadDims { d_a, d_b });
        }
        Ok(Self { d_a, d_b })
    }

    /// Two `d`-level systems.
    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    pub fn total(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Composite row index of `|e_i, f_j>`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.d_b + j
    }

    /// Smaller of the two local dimensions: the largest possible Schmidt rank.
    pub fn min_dim(&self) -> usize {
        self.d_a.min(self.d_b)
    }
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_mismatch(rows * cols, data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from separate real and imaginary row-major parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let rows = re.len();
        let cols = re.first().map_or(0, Vec::len);
        if im.len() != rows {
            return Err(dim_mismatch(format!("{rows} imaginary rows"), im.len()));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (r, (re_row, im_row)) in re.iter().zip(im).enumerate() {
            if re_row.len() != cols || im_row.len() != cols {
                return Err(dim_mismatch(
                    format!("{cols} columns"),
                    format!("row {r} with {}/{} columns", re_row.len(), im_row.len()),
                ));
            }
            for (&x, &y) in re_row.iter().zip(im_row) {
                data.push(Complex::new(T::of(x), T::of(y)));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    /// Real and imaginary parts as nested row vectors.
    pub fn to_parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let re = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self[(r, c)].re.to_f64_lossy())
                    .collect()
            })
            .collect();
        let im = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self[(r, c)].im.to_f64_lossy())
                    .collect()
            })
            .collect();
        (re, im)
    }

    /// Real matrix from rows of literals.
    pub fn real(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n_rows, n_cols, |r, c| {
            Complex::new(T::of(rows[r][c]), T::zero())
        })
    }

    pub fn diag_real(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    /// The rank-one projector `|v><v|` (no normalization applied).
    pub fn outer(v: &[Complex<T>]) -> Self {
        Self::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
    }

    /// Column vector as a matrix.
    pub fn column(v: &[Complex<T>]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn col(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_col(&mut self, c: usize, v: &[Complex<T>]) {
        for (r, &x) in v.iter().enumerate() {
            self[(r, c)] = x;
        }
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = Complex::new(T::zero(), T::zero());
        for r in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(r, k)] * other[(k, r)];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entrywise distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// `max |h - h^dagger|` over entries; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut dev = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// `max |U^dagger U - I|` over entries.
    pub fn unitary_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        (&self.dagger() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(Complex::new(T::zero(), T::zero()), |acc, c| {
                    acc + self[(r, c)] * v[c]
                })
            })
            .collect()
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::of(z.re.to_f64_lossy()), U::of(z.im.to_f64_lossy())))
                .collect(),
        }
    }

    fn check_hermitian(&self, tol: &Tolerance<T>) -> Result<()> {
        if !self.is_square() {
            return Err(dim_mismatch(
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let dev = self.hermitian_deviation();
        if dev > tol.eig_tol * T::one().max(self.max_abs()) {
            return Err(Error::NotHermitian {
                deviation: dev.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.data[k * rhs.cols + c];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixParts {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl<T: Real> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (re, im) = self.to_parts();
        MatrixParts { re, im }.serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let parts = MatrixParts::deserialize(deserializer)?;
        Matrix::from_parts(&parts.re, &parts.im).map_err(serde::de::Error::custom)
    }
}

/// Kronecker product: `(A ⊗ B)[i*rB + k, j*cB + l] = A[i,j] * B[k,l]`.
pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (rb, cb) = (b.rows, b.cols);
    Matrix::from_fn(a.rows * rb, a.cols * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

/// Kronecker product of two column vectors.
pub fn kron_vec<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

pub fn dagger<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    a.dagger()
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues<T: Real>(h: &Matrix<T>, tol: &Tolerance<T>) -> Result<Vec<T>> {
    h.check_hermitian(tol)?;
    Ok(jacobi_eigh(h, false).0)
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (as columns).
pub fn hermitian_eigh<T: Real>(h: &Matrix<T>, tol: &Tolerance<T>) -> Result<(Vec<T>, Matrix<T>)> {
    h.check_hermitian(tol)?;
    let (values, vectors) = jacobi_eigh(h, true);
    Ok((values, vectors.expect("eigenvectors requested")))
}

/// Determinant of a Hermitian matrix, returned as a real number.
pub fn determinant<T: Real>(h: &Matrix<T>, tol: &Tolerance<T>) -> Result<T> {
    h.check_hermitian(tol)?;
    let det = lu_determinant(h);
    if det.im.abs() > tol.eig_tol * T::one().max(det.re.abs()) {
        return Err(Error::NotHermitian {
            deviation: det.im.abs().to_f64_lossy(),
        });
    }
    Ok(det.re)
}

/// Rows and columns restricted to `idx`, which must be non-empty, strictly
/// increasing and in range.
pub fn principal_submatrix<T: Real>(h: &Matrix<T>, idx: &[usize]) -> Result<Matrix<T>> {
    let n = h.rows.min(h.cols);
    let increasing = idx.windows(2).all(|w| w[0] < w[1]);
    if idx.is_empty() || !increasing || idx.iter().any(|&i| i >= n) {
        return Err(Error::BadIndexSet(idx.to_vec()));
    }
    Ok(Matrix::from_fn(idx.len(), idx.len(), |r, c| {
        h[(idx[r], idx[c])]
    }))
}

/// Positive semidefiniteness: `min eig >= -eig_tol * max(1, max |eig|)`.
pub fn is_psd<T: Real>(h: &Matrix<T>, tol: &Tolerance<T>) -> Result<bool> {
    let eig = hermitian_eigenvalues(h, tol)?;
    Ok(psd_from_spectrum(&eig, tol))
}

pub(crate) fn psd_from_spectrum<T: Real>(eig: &[T], tol: &Tolerance<T>) -> bool {
    let scale = eig.iter().fold(T::one(), |m, v| m.max(v.abs()));
    eig.first().is_none_or(|&min| min >= -tol.eig_tol * scale)
}

/// Partial transpose on subsystem B: output `(ij, kl)` is input `(il, kj)`.
pub fn partial_transpose<T: Real>(rho: &Matrix<T>, dims: BipartiteDims) -> Result<Matrix<T>> {
    let n = dims.total();
    if rho.rows != n || rho.cols != n {
        return Err(dim_mismatch(
            format!("{n}x{n}"),
            format!("{}x{}", rho.rows, rho.cols),
        ));
    }
    let db = dims.d_b;
    Ok(Matrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        rho[(i * db + l, k * db + j)]
    }))
}

/// `sum_k (I ⊗ K_k) rho (I ⊗ K_k)^dagger` for Kraus operators acting on B.
pub fn apply_kraus_on_b<T: Real>(
    rho: &Matrix<T>,
    kraus: &[Matrix<T>],
    dims: BipartiteDims,
    tol: &Tolerance<T>,
) -> Result<Matrix<T>> {
    let n = dims.total();
    if rho.rows != n || rho.cols != n {
        return Err(dim_mismatch(
            format!("{n}x{n}"),
            format!("{}x{}", rho.rows, rho.cols),
        ));
    }
    let mut completeness = Matrix::zeros(dims.d_b, dims.d_b);
    for k in kraus {
        if k.rows != dims.d_b || k.cols != dims.d_b {
            return Err(dim_mismatch(
                format!("{0}x{0} Kraus operator", dims.d_b),
                format!("{}x{}", k.rows, k.cols),
            ));
        }
        completeness = &completeness + &(&k.dagger() * k);
    }
    let dev = completeness.max_abs_diff(&Matrix::identity(dims.d_b));
    if dev > tol.eig_tol {
        return Err(Error::NotTracePreserving(dev.to_f64_lossy()));
    }
    let id_a = Matrix::identity(dims.d_a);
    let mut out = Matrix::zeros(n, n);
    for k in kraus {
        let big = kron(&id_a, k);
        out = &out + &(&(&big * rho) * &big.dagger());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sigma_y() -> M {
        M::from_fn(2, 2, |r, col| match (r, col) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        })
    }

    fn lcg_matrix(n: usize, seed: u64) -> M {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        M::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn kron_identities_and_paulis() {
        assert_eq!(kron(&M::identity(2), &M::identity(2)), M::identity(4));
        let z = M::real(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(kron(&z, &z), M::diag_real(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_matches_index_loop() {
        // X_{01} on a qutrit
        let x = M::real(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let k = kron(&x, &x);
        let mut oracle = M::zeros(9, 9);
        for i in 0..3 {
            for j in 0..3 {
                for kk in 0..3 {
                    for l in 0..3 {
                        oracle[(i * 3 + kk, j * 3 + l)] = x[(i, j)] * x[(kk, l)];
                    }
                }
            }
        }
        assert_eq!(k, oracle);
        let ones: Vec<_> = (0..81).filter(|&t| k.as_slice()[t].re == 1.0).collect();
        assert_eq!(ones, vec![4, 12, 28, 36]);
    }

    #[test]
    fn dagger_cases() {
        assert_eq!(dagger(&M::identity(3)), M::identity(3));
        assert_eq!(dagger(&sigma_y()), sigma_y());
        let m = lcg_matrix(4, 9);
        assert_eq!(dagger(&dagger(&m)), m);
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let tol = Tolerance::default();
        let x = M::real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let ev = hermitian_eigenvalues(&x, &tol).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let ev = hermitian_eigenvalues(&M::diag_real(&[3.0, 1.0, 2.0]), &tol).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let tol = Tolerance::default();
        let m = M::real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            hermitian_eigenvalues(&m, &tol),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            determinant(&m, &tol),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let tol = Tolerance::default();
        for seed in 0..20 {
            let m = lcg_matrix(6, seed);
            let h = &m + &m.dagger();
            let (vals, vecs) = hermitian_eigh(&h, &tol).unwrap();
            let d = &(&vecs.dagger() * &h) * &vecs;
            assert!(d.max_abs_diff(&M::diag_real(&vals)) < 1e-12);
            assert!(vecs.unitary_deviation() < 1e-12);
        }
    }

    fn cofactor_det(m: &M) -> Complex<f64> {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut acc = c(0.0, 0.0);
        for col in 0..n {
            let minor = M::from_fn(n - 1, n - 1, |r, cc| {
                m[(r + 1, if cc < col { cc } else { cc + 1 })]
            });
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            acc += m[(0, col)] * cofactor_det(&minor) * sign;
        }
        acc
    }

    #[test]
    fn determinant_matches_cofactor_oracle() {
        let tol = Tolerance::default();
        assert_eq!(determinant(&M::identity(3), &tol).unwrap(), 1.0);
        for seed in 0..50 {
            let m = lcg_matrix(3, seed + 100);
            let h = &m + &m.dagger();
            let oracle = cofactor_det(&h);
            assert!(oracle.im.abs() < 1e-14);
            assert!((determinant(&h, &tol).unwrap() - oracle.re).abs() < 1e-12);
        }
    }

    #[test]
    fn principal_submatrix_cases() {
        let d = M::diag_real(&[1.0, 2.0, 3.0]);
        assert_eq!(principal_submatrix(&d, &[0, 1, 2]).unwrap(), d);
        assert_eq!(
            principal_submatrix(&d, &[0, 2]).unwrap(),
            M::diag_real(&[1.0, 3.0])
        );
        for bad in [&[][..], &[1, 0], &[0, 0], &[3]] {
            assert!(matches!(
                principal_submatrix(&d, bad),
                Err(Error::BadIndexSet(_))
            ));
        }
    }

    #[test]
    fn psd_cases() {
        let tol = Tolerance::default();
        assert!(is_psd(&M::identity(4), &tol).unwrap());
        assert!(!is_psd(&M::diag_real(&[1.0, -1e-3]), &tol).unwrap());
    }

    #[test]
    fn partial_transpose_of_phi_plus_is_half_swap() {
        let tol = Tolerance::default();
        let dims = BipartiteDims::square(2).unwrap();
        let s = 0.5f64.sqrt();
        let phi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let pt = partial_transpose(&M::outer(&phi), dims).unwrap();
        let mut swap = M::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = c(0.5, 0.0);
            }
        }
        assert!(pt.max_abs_diff(&swap) < 1e-15);
        let ev = hermitian_eigenvalues(&pt, &tol).unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        assert!(ev.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn partial_transpose_of_product() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let a = lcg_matrix(2, 1);
        let b = lcg_matrix(3, 2);
        let pt = partial_transpose(&kron(&a, &b), dims).unwrap();
        assert!(pt.max_abs_diff(&kron(&a, &b.transpose())) < 1e-15);
        assert!(matches!(
            partial_transpose(&M::identity(5), dims),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kraus_identity_and_errors() {
        let tol = Tolerance::default();
        let dims = BipartiteDims::square(2).unwrap();
        let m = lcg_matrix(4, 3);
        let rho = &m * &m.dagger();
        let out = apply_kraus_on_b(&rho, &[M::identity(2)], dims, &tol).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
        let bad = M::diag_real(&[1.0, 0.5]);
        assert!(matches!(
            apply_kraus_on_b(&rho, &[bad], dims, &tol),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(M::from_vec(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(matches!(
            M::from_vec(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn f32_backend_agrees() {
        let tol = Tolerance::<f32>::default();
        let m = lcg_matrix(5, 77);
        let h = &m + &m.dagger();
        let ev64 = hermitian_eigenvalues(&h, &Tolerance::default()).unwrap();
        let ev32 = hermitian_eigenvalues(&h.cast::<f32>(), &tol).unwrap();
        for (a, b) in ev64.iter().zip(ev32) {
            assert!((a - b as f64).abs() < 1e-4);
        }
    }
}
