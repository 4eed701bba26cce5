//! Bipartite states: density matrices, pure states, Schmidt forms and the
//! Bell-diagonal tetrahedron.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::matcore::{
    apply_kraus_on_b, complete_basis, hermitian_eigenvalues, jacobi_svd, kron, partial_transpose,
    BipartiteDims, Matrix, Tolerance,
};
use crate::scalar::Real;

/// Slack for "sums to one" checks: 1e-10 in f64, relaxed to a few ulps in f32.
pub(crate) fn unit_slack<T: Real>(target: f64) -> T {
    T::of(target).max(T::epsilon() * T::of(64.0))
}

/// A bipartite mixed state. Construct through [`DensityMatrix::new`], which
/// checks Hermiticity, unit trace and positivity.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    dims: BipartiteDims,
    mat: Matrix<T>,
}

/// A normalized bipartite state vector, amplitude `i * d_b + j` for `|i, j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    dims: BipartiteDims,
    amplitudes: Vec<Complex<T>>,
}

/// Squared Schmidt coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtWeights<T> {
    p: Vec<T>,
}

/// `|psi> = sum_i sqrt(p_i) |e_i> (x) |f_i>`, with `e_i`/`f_i` the leading
/// columns of the two bases.
#[derive(Clone, Debug)]
pub struct SchmidtForm<T> {
    pub left_basis: Matrix<T>,
    pub right_basis: Matrix<T>,
    pub weights: SchmidtWeights<T>,
}

/// Bell-diagonal state `p0 phi+ + p1 psi+ + p2 psi- + p3 phi-`, stored by its
/// probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalCoords<T> {
    p: [T; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

#[derive(Serialize, Deserialize)]
struct DensityFile {
    d_a: usize,
    d_b: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(dims: BipartiteDims, mat: Matrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        let n = dims.total();
        if mat.rows() != n || mat.cols() != n {
            return Err(dim_mismatch(
                format!("{n}x{n}"),
                format!("{}x{}", mat.rows(), mat.cols()),
            ));
        }
        let eig = hermitian_eigenvalues(&mat, tol)?;
        let tr = mat.trace().re;
        if (tr - T::one()).abs() > unit_slack(1e-10) {
            return Err(Error::NotAState(format!("trace {tr}")));
        }
        if let Some(&min) = eig.first() {
            if min < -tol.eig_tol {
                return Err(Error::NotAState(format!("negative eigenvalue {min}")));
            }
        }
        Ok(Self { dims, mat })
    }

    /// Skips validation; for constructions that are states by design.
    pub(crate) fn from_parts_unchecked(dims: BipartiteDims, mat: Matrix<T>) -> Self {
        debug_assert_eq!(mat.rows(), dims.total());
        Self { dims, mat }
    }

    /// The maximally mixed state on `dims`.
    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self::from_parts_unchecked(dims, Matrix::identity(n).scale(T::one() / T::of(n as f64)))
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn mat(&self) -> &Matrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.mat
    }

    /// `rho_{ij,kl} = <e_i f_j| rho |e_k f_l>` in the computational basis.
    #[inline]
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> Complex<T> {
        self.mat[(self.dims.index(i, j), self.dims.index(k, l))]
    }

    pub fn partial_transpose(&self) -> Matrix<T> {
        partial_transpose(&self.mat, self.dims).expect("dims checked at construction")
    }

    /// Ascending spectrum of the partial transpose.
    pub fn pt_eigenvalues(&self, tol: &Tolerance<T>) -> Vec<T> {
        hermitian_eigenvalues(&self.partial_transpose(), tol)
            .expect("partial transpose of a state is Hermitian")
    }

    pub fn eigenvalues(&self, tol: &Tolerance<T>) -> Vec<T> {
        hermitian_eigenvalues(&self.mat, tol).expect("state is Hermitian")
    }

    pub fn purity(&self) -> T {
        self.mat.trace_product(&self.mat).re
    }

    /// Reduced state on A.
    pub fn partial_trace_b(&self) -> Matrix<T> {
        let (da, db) = (self.dims.d_a, self.dims.d_b);
        Matrix::from_fn(da, da, |i, k| {
            (0..db).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                acc + self.entry(i, j, k, j)
            })
        })
    }

    /// Reduced state on B.
    pub fn partial_trace_a(&self) -> Matrix<T> {
        let (da, db) = (self.dims.d_a, self.dims.d_b);
        Matrix::from_fn(db, db, |j, l| {
            (0..da).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
                acc + self.entry(i, j, i, l)
            })
        })
    }

    /// Convex mixture `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        if self.dims != other.dims {
            return Err(dim_mismatch(
                format!("{:?}", self.dims),
                format!("{:?}", other.dims),
            ));
        }
        if !(w >= T::zero() && w <= T::one()) {
            return Err(Error::BadMixingParameter(w.to_f64_lossy()));
        }
        let m = &self.mat.scale(w) + &other.mat.scale(T::one() - w);
        Ok(Self::from_parts_unchecked(self.dims, m))
    }

    pub fn from_json_str(s: &str, tol: &Tolerance<T>) -> Result<Self> {
        let file: DensityFile = serde_json::from_str(s)?;
        let dims = BipartiteDims::new(file.d_a, file.d_b)?;
        let mat = Matrix::from_parts(&file.re, &file.im)?;
        Self::new(dims, mat, tol)
    }

    pub fn to_json_string(&self) -> String {
        let (re, im) = self.mat.to_parts();
        let file = DensityFile {
            d_a: self.dims.d_a,
            d_b: self.dims.d_b,
            re,
            im,
        };
        serde_json::to_string_pretty(&file).expect("plain numeric payload")
    }

    pub fn read_json(path: impl AsRef<Path>, tol: &Tolerance<T>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?, tol)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// `(c, a, b)` standing for `c |a> (x) |b>`.
pub type ProductTerm<T> = (Complex<T>, Vec<Complex<T>>, Vec<Complex<T>>);

impl<T: Real> PureState<T> {
    pub fn new(dims: BipartiteDims, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(dim_mismatch(dims.total(), amplitudes.len()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !norm.is_finite() || (norm - T::one()).abs() > unit_slack(1e-12) {
            return Err(Error::NotNormalized(norm.to_f64_lossy()));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescales an arbitrary non-zero vector to unit norm.
    pub fn normalized(dims: BipartiteDims, mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::zero() || !norm.is_finite() {
            return Err(Error::NotNormalized(norm.to_f64_lossy()));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(dims, amplitudes)
    }

    /// `sum_i c_i |a_i> (x) |b_i>` from local vectors, normalized.
    pub fn from_terms(dims: BipartiteDims, terms: &[ProductTerm<T>]) -> Result<Self> {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dims.total()];
        for (c, a, b) in terms {
            if a.len() != dims.d_a || b.len() != dims.d_b {
                return Err(dim_mismatch(
                    format!("{}+{}", dims.d_a, dims.d_b),
                    format!("{}+{}", a.len(), b.len()),
                ));
            }
            for (i, &ai) in a.iter().enumerate() {
                for (j, &bj) in b.iter().enumerate() {
                    amps[dims.index(i, j)] += c * ai * bj;
                }
            }
        }
        Self::normalized(dims, amps)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Applies `U (x) V` to the state.
    pub fn apply_local(&self, u: &Matrix<T>, v: &Matrix<T>) -> Result<Self> {
        let uv = kron(u, v);
        if uv.cols() != self.amplitudes.len() {
            return Err(dim_mismatch(self.amplitudes.len(), uv.cols()));
        }
        Self::normalized(self.dims, uv.mul_vec(&self.amplitudes))
    }
}

impl<T: Real> SchmidtWeights<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::BadWeights("empty weight vector".into()));
        }
        if let Some(bad) = p.iter().find(|&&x| x <= T::zero() || !x.is_finite()) {
            return Err(Error::BadWeights(format!("non-positive weight {bad}")));
        }
        let sum: T = p.iter().copied().sum();
        if (sum - T::one()).abs() > unit_slack(1e-12) {
            return Err(Error::BadWeights(format!("weights sum to {sum}")));
        }
        Ok(Self { p })
    }

    /// Normalizes positive numbers into weights.
    pub fn from_unnormalized(raw: &[T]) -> Result<Self> {
        let sum: T = raw.iter().copied().sum();
        if sum.is_nan() || sum <= T::zero() {
            return Err(Error::BadWeights("weights sum to zero".into()));
        }
        Self::new(raw.iter().map(|&x| x / sum).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadWeights("empty weight vector".into()));
        }
        Ok(Self {
            p: vec![T::one() / T::of(k as f64); k],
        })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// The Schmidt coefficients `sqrt(p_i)`.
    pub fn sqrt_vec(&self) -> Vec<T> {
        self.p.iter().map(|x| x.sqrt()).collect()
    }
}

impl<T: Real> SchmidtForm<T> {
    /// Rebuilds `sum_i sqrt(p_i) |e_i, f_i>`.
    pub fn reconstruct(&self) -> Vec<Complex<T>> {
        let (da, db) = (self.left_basis.rows(), self.right_basis.rows());
        let mut amps = vec![Complex::new(T::zero(), T::zero()); da * db];
        for (k, s) in self.weights.sqrt_vec().into_iter().enumerate() {
            for i in 0..da {
                for j in 0..db {
                    amps[i * db + j] += self.left_basis[(i, k)] * self.right_basis[(j, k)] * s;
                }
            }
        }
        amps
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }
}

impl<T: Real> BellDiagonalCoords<T> {
    /// Probabilities of (phi+, psi+, psi-, phi-). Entries down to `-eig_tol`
    /// are accepted and clamped.
    pub fn from_probabilities(p: [T; 4], tol: &Tolerance<T>) -> Result<Self> {
        if let Some(bad) = p.iter().find(|&&x| x < -tol.eig_tol || !x.is_finite()) {
            return Err(Error::NotAState(format!("Bell weight {bad}")));
        }
        let sum: T = p.iter().copied().sum();
        if (sum - T::one()).abs() > unit_slack(1e-10) {
            return Err(Error::NotAState(format!("Bell weights sum to {sum}")));
        }
        Ok(Self {
            p: p.map(|x| x.max(T::zero())),
        })
    }

    pub fn from_xyz(x: T, y: T, z: T, tol: &Tolerance<T>) -> Result<Self> {
        let q = T::of(0.25);
        let one = T::one();
        Self::from_probabilities(
            [
                (one + x + y + z) * q,
                (one + x - y - z) * q,
                (one - x + y - z) * q,
                (one - x - y + z) * q,
            ],
            tol,
        )
    }

    pub fn probabilities(&self) -> [T; 4] {
        self.p
    }

    pub fn x(&self) -> T {
        self.p[0] + self.p[1] - self.p[2] - self.p[3]
    }

    pub fn y(&self) -> T {
        self.p[0] - self.p[1] + self.p[2] - self.p[3]
    }

    pub fn z(&self) -> T {
        self.p[0] - self.p[1] - self.p[2] + self.p[3]
    }

    /// Partial-transpose eigenvalues `1/2 - p_i`, in the probability order.
    pub fn pt_spectrum(&self) -> [T; 4] {
        self.p.map(|x| T::of(0.5) - x)
    }
}

fn two_qubits() -> BipartiteDims {
    BipartiteDims { d_a: 2, d_b: 2 }
}

pub fn density_from_pure<T: Real>(psi: &PureState<T>) -> Result<DensityMatrix<T>> {
    let norm = psi
        .amplitudes
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<T>()
        .sqrt();
    if (norm - T::one()).abs() > unit_slack(1e-12) {
        return Err(Error::NotNormalized(norm.to_f64_lossy()));
    }
    Ok(DensityMatrix::from_parts_unchecked(
        psi.dims,
        Matrix::outer(&psi.amplitudes),
    ))
}

pub fn bell<T: Real>(kind: BellKind) -> PureState<T> {
    let s = T::FRAC_1_SQRT_2();
    let z = T::zero();
    let amps = match kind {
        BellKind::PhiPlus => [s, z, z, s],
        BellKind::PhiMinus => [s, z, z, -s],
        BellKind::PsiPlus => [z, s, s, z],
        BellKind::PsiMinus => [z, s, -s, z],
    };
    PureState {
        dims: two_qubits(),
        amplitudes: amps.iter().map(|&x| Complex::new(x, z)).collect(),
    }
}

/// `(1/sqrt d) sum_i |i, i>`.
pub fn max_entangled<T: Real>(d: usize) -> Result<PureState<T>> {
    let dims = BipartiteDims::square(d)?;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); d * d];
    let s = if d == 2 {
        T::FRAC_1_SQRT_2()
    } else {
        T::one() / T::of(d as f64).sqrt()
    };
    for i in 0..d {
        amps[dims.index(i, i)] = Complex::new(s, T::zero());
    }
    Ok(PureState {
        dims,
        amplitudes: amps,
    })
}

/// `(1/4)(I + x XX - y YY + z ZZ)`.
pub fn bell_diagonal<T: Real>(coords: &BellDiagonalCoords<T>) -> DensityMatrix<T> {
    let [p0, p1, p2, p3] = coords.p;
    let h = T::of(0.5);
    let c = |x: T| Complex::new(x, T::zero());
    let zero = c(T::zero());
    // phi+- occupy span{00, 11}, psi+- span{01, 10}
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = c((p0 + p3) * h);
    m[(3, 3)] = c((p0 + p3) * h);
    m[(0, 3)] = c((p0 - p3) * h);
    m[(3, 0)] = c((p0 - p3) * h);
    m[(1, 1)] = c((p1 + p2) * h);
    m[(2, 2)] = c((p1 + p2) * h);
    m[(1, 2)] = c((p1 - p2) * h);
    m[(2, 1)] = c((p1 - p2) * h);
    debug_assert_eq!(m[(0, 1)], zero);
    DensityMatrix::from_parts_unchecked(two_qubits(), m)
}

/// Schmidt decomposition via SVD of the coefficient matrix. Weights are
/// descending, weights below 1e-12 are dropped, and each left vector's first
/// non-negligible component is made real positive.
pub fn schmidt_decompose<T: Real>(psi: &PureState<T>) -> SchmidtForm<T> {
    let (da, db) = (psi.dims.d_a, psi.dims.d_b);
    let coeff = Matrix::from_fn(da, db, |i, j| psi.amplitudes[i * db + j]);
    let (u, s, w) = jacobi_svd(&coeff);
    let cutoff = T::of(1e-12).max(T::epsilon() * T::of(16.0));

    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut weights = Vec::new();
    for (k, &sigma) in s.iter().enumerate() {
        let p = sigma * sigma;
        if p < cutoff {
            continue;
        }
        let mut e = u.col(k);
        // psi = sum_k sigma_k u_k (x) conj(w_k)
        let mut f: Vec<_> = w.col(k).iter().map(|z| z.conj()).collect();
        let lead = e
            .iter()
            .copied()
            .find(|z| z.norm() > T::of(1e-8))
            .unwrap_or(Complex::new(T::one(), T::zero()));
        let phase = lead / lead.norm();
        for z in &mut e {
            *z *= phase.conj();
        }
        for z in &mut f {
            *z *= phase;
        }
        left.push(e);
        right.push(f);
        weights.push(p);
    }
    SchmidtForm {
        left_basis: complete_basis(&left, da),
        right_basis: complete_basis(&right, db),
        weights: SchmidtWeights::from_unnormalized(&weights)
            .expect("a unit vector has a positive Schmidt weight"),
    }
}

/// `p |psi><psi| + (1 - p) I / D`.
pub fn pseudo_pure<T: Real>(psi: &PureState<T>, p: T) -> Result<DensityMatrix<T>> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::BadMixingParameter(p.to_f64_lossy()));
    }
    let pure = density_from_pure(psi)?;
    pure.mix(&DensityMatrix::maximally_mixed(psi.dims), p)
}

/// Kraus pair of the amplitude-damping channel.
pub fn amplitude_damping_kraus<T: Real>(gamma: T) -> Result<[Matrix<T>; 2]> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(Error::BadGamma(gamma.to_f64_lossy()));
    }
    let c = |x: T| Complex::new(x, T::zero());
    let zero = c(T::zero());
    let a0 = Matrix::from_vec(
        2,
        2,
        vec![c(T::one()), zero, zero, c((T::one() - gamma).sqrt())],
    )?;
    let a1 = Matrix::from_vec(2, 2, vec![zero, c(gamma.sqrt()), zero, zero])?;
    Ok([a0, a1])
}

/// Amplitude damping with strength `gamma` on the B half of `phi+`.
pub fn amplitude_damped<T: Real>(gamma: T) -> Result<DensityMatrix<T>> {
    let kraus = amplitude_damping_kraus(gamma)?;
    let phi = density_from_pure(&bell::<T>(BellKind::PhiPlus))?;
    let out = apply_kraus_on_b(phi.mat(), &kraus, two_qubits(), &Tolerance::default())?;
    Ok(DensityMatrix::from_parts_unchecked(two_qubits(), out))
}

/// `(U^dagger (x) V^dagger) rho (U (x) V)`.
pub fn conjugate_local<T: Real>(
    rho: &DensityMatrix<T>,
    u: &Matrix<T>,
    v: &Matrix<T>,
    tol: &Tolerance<T>,
) -> Result<DensityMatrix<T>> {
    let dims = rho.dims;
    for (m, d) in [(u, dims.d_a), (v, dims.d_b)] {
        if m.rows() != d || m.cols() != d {
            return Err(dim_mismatch(
                format!("{d}x{d} unitary"),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        let dev = m.unitary_deviation();
        if dev > tol.eig_tol {
            return Err(Error::NotUnitary(dev.to_f64_lossy()));
        }
    }
    let uv = kron(u, v);
    let out = &(&uv.dagger() * &rho.mat) * &uv;
    Ok(DensityMatrix::from_parts_unchecked(dims, out))
}

/// Single-qubit eigenbases of the Pauli operators, as `(plus, minus)` vectors.
pub mod qubit {
    use super::*;

    pub fn z_pm<T: Real>() -> [Vec<Complex<T>>; 2] {
        let (o, z) = (
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), T::zero()),
        );
        [vec![o, z], vec![z, o]]
    }

    pub fn x_pm<T: Real>() -> [Vec<Complex<T>>; 2] {
        let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        [vec![s, s], vec![s, -s]]
    }

    pub fn y_pm<T: Real>() -> [Vec<Complex<T>>; 2] {
        let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let is = Complex::new(T::zero(), T::FRAC_1_SQRT_2());
        [vec![s, is], vec![s, -is]]
    }

    /// Unitary with the given vectors as columns.
    pub fn basis<T: Real>(first: &[Complex<T>], second: &[Complex<T>]) -> Matrix<T> {
        let mut m = Matrix::zeros(2, 2);
        m.set_col(0, first);
        m.set_col(1, second);
        m
    }

    pub fn sigma_x<T: Real>() -> Matrix<T> {
        Matrix::real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
}

/// One of the six two-qubit states `a|.> + b|.>` whose witnesses need only
/// `sigma_a (x) sigma_a` settings. `family` is 1-based.
pub fn minimal_measurement_state<T: Real>(family: usize, a: T, b: T) -> Result<PureState<T>> {
    let v = |k: BellKind| bell::<T>(k).amplitudes;
    let i = Complex::new(T::zero(), T::one());
    let one = Complex::new(T::one(), T::zero());
    let (first, second, phase) = match family {
        1 => (BellKind::PhiPlus, BellKind::PhiMinus, one),
        2 => (BellKind::PsiPlus, BellKind::PsiMinus, one),
        3 => (BellKind::PhiPlus, BellKind::PsiPlus, one),
        4 => (BellKind::PhiMinus, BellKind::PsiMinus, one),
        5 => (BellKind::PhiPlus, BellKind::PsiMinus, i),
        6 => (BellKind::PhiMinus, BellKind::PsiPlus, i),
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    let amps = v(first)
        .iter()
        .zip(v(second))
        .map(|(&x, y)| x * a + phase * y * b)
        .collect();
    PureState::normalized(two_qubits(), amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type D = DensityMatrix<f64>;

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn phi_plus() -> D {
        density_from_pure(&bell(BellKind::PhiPlus)).unwrap()
    }

    fn random_pure(dims: BipartiteDims, raw: &[f64]) -> PureState<f64> {
        let amps = (0..dims.total())
            .map(|k| Complex::new(raw[2 * k], raw[2 * k + 1]))
            .collect();
        PureState::normalized(dims, amps).unwrap()
    }

    #[test]
    fn density_from_product_and_bell() {
        let dims = BipartiteDims::square(2).unwrap();
        let ket = PureState::new(dims, vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(
            density_from_pure(&ket).unwrap().mat(),
            &Matrix::diag_real(&[1.0, 0.0, 0.0, 0.0])
        );
        let rho = phi_plus();
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((rho.mat()[(r, col)].re - 0.5).abs() < 1e-15);
        }
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert!(matches!(
            PureState::new(dims, vec![c(1.0), c(1.0), c(0.0), c(0.0)]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn bell_vectors_and_local_flip() {
        let s = 0.5f64.sqrt();
        assert_eq!(
            bell::<f64>(BellKind::PhiPlus).amplitudes(),
            &[c(s), c(0.0), c(0.0), c(s)]
        );
        assert_eq!(
            bell::<f64>(BellKind::PsiMinus).amplitudes(),
            &[c(0.0), c(s), c(-s), c(0.0)]
        );
        let id = Matrix::identity(2);
        let x = qubit::sigma_x();
        for (from, to) in [
            (BellKind::PsiPlus, BellKind::PhiPlus),
            (BellKind::PsiMinus, BellKind::PhiMinus),
        ] {
            let flipped = bell::<f64>(from).apply_local(&id, &x).unwrap();
            let target = bell::<f64>(to);
            let diff: f64 = flipped
                .amplitudes()
                .iter()
                .zip(target.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .sum();
            assert!(diff < 1e-15);
        }
    }

    #[test]
    fn max_entangled_cases() {
        assert_eq!(max_entangled::<f64>(2).unwrap(), bell(BellKind::PhiPlus));
        let psi = max_entangled::<f64>(3).unwrap();
        for (k, a) in psi.amplitudes().iter().enumerate() {
            let expect = if [0, 4, 8].contains(&k) {
                1.0 / 3f64.sqrt()
            } else {
                0.0
            };
            assert!((a.re - expect).abs() < 1e-15 && a.im == 0.0);
        }
        let reduced = density_from_pure(&psi).unwrap().partial_trace_b();
        assert!(reduced.max_abs_diff(&Matrix::identity(3).scale(1.0 / 3.0)) < 1e-15);
    }

    #[test]
    fn bell_diagonal_examples() {
        let t = tol();
        let mixed = bell_diagonal(&BellDiagonalCoords::from_probabilities([0.25; 4], &t).unwrap());
        assert!(mixed.mat().max_abs_diff(&Matrix::identity(4).scale(0.25)) < 1e-15);
        let pure = bell_diagonal(
            &BellDiagonalCoords::from_probabilities([1.0, 0.0, 0.0, 0.0], &t).unwrap(),
        );
        assert!(pure.mat().max_abs_diff(phi_plus().mat()) < 1e-15);
        let half = BellDiagonalCoords::from_probabilities([0.5, 0.5, 0.0, 0.0], &t).unwrap();
        assert_eq!((half.x(), half.y(), half.z()), (1.0, 0.0, 0.0));
        let psi_plus = density_from_pure(&bell(BellKind::PsiPlus)).unwrap();
        let oracle = phi_plus().mix(&psi_plus, 0.5).unwrap();
        assert!(bell_diagonal(&half).mat().max_abs_diff(oracle.mat()) < 1e-15);
        assert!(matches!(
            BellDiagonalCoords::from_probabilities([1.2, -0.2, 0.0, 0.0], &t),
            Err(Error::NotAState(_))
        ));
    }

    #[test]
    fn bell_diagonal_matches_pauli_expansion() {
        let t = tol();
        let coords = BellDiagonalCoords::from_probabilities([0.1, 0.2, 0.3, 0.4], &t).unwrap();
        let (x, y, z) = (coords.x(), coords.y(), coords.z());
        let sx = Matrix::<f64>::real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let sy = Matrix::from_fn(2, 2, |r, col| match (r, col) {
            (0, 1) => Complex::new(0.0, -1.0),
            (1, 0) => Complex::new(0.0, 1.0),
            _ => c(0.0),
        });
        let sz = Matrix::<f64>::diag_real(&[1.0, -1.0]);
        let mut oracle = Matrix::identity(4);
        oracle = &oracle + &kron(&sx, &sx).scale(x);
        oracle = &oracle - &kron(&sy, &sy).scale(y);
        oracle = &oracle + &kron(&sz, &sz).scale(z);
        assert!(
            bell_diagonal(&coords)
                .mat()
                .max_abs_diff(&oracle.scale(0.25))
                < 1e-15
        );
    }

    #[test]
    fn bell_pt_spectrum() {
        let t = tol();
        let coords = BellDiagonalCoords::from_probabilities([0.6, 0.2, 0.1, 0.1], &t).unwrap();
        let ev = bell_diagonal(&coords).pt_eigenvalues(&t);
        let mut expect = coords.pt_spectrum().to_vec();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((ev[0] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let dims = BipartiteDims::square(2).unwrap();
        let product = PureState::new(dims, vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let f = schmidt_decompose(&product);
        assert_eq!(f.rank(), 1);
        assert!((f.weights.as_slice()[0] - 1.0).abs() < 1e-15);
        let f = schmidt_decompose(&bell::<f64>(BellKind::PhiPlus));
        assert_eq!(f.rank(), 2);
        assert!(f.weights.as_slice().iter().all(|p| (p - 0.5).abs() < 1e-14));
    }

    fn overlap(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.conj() * y)
            .sum::<Complex<f64>>()
            .norm()
    }

    #[test]
    fn six_families_have_claimed_schmidt_forms() {
        let (z, x, y) = (
            qubit::z_pm::<f64>(),
            qubit::x_pm::<f64>(),
            qubit::y_pm::<f64>(),
        );
        // (e for alpha, f for alpha, e for beta, f for beta)
        let claims = [
            (&z[0], &z[0], &z[1], &z[1]),
            (&z[0], &z[1], &z[1], &z[0]),
            (&x[0], &x[0], &x[1], &x[1]),
            (&x[1], &x[0], &x[0], &x[1]),
            (&y[1], &y[0], &y[0], &y[1]),
            (&y[0], &y[0], &y[1], &y[1]),
        ];
        for a in [0.2f64, 0.5, 0.9] {
            let b = (1.0 - a * a).sqrt();
            let (alpha2, beta2) = ((a + b).powi(2) / 2.0, (a - b).powi(2) / 2.0);
            for (n, claim) in claims.iter().enumerate() {
                let psi = minimal_measurement_state(n + 1, a, b).unwrap();
                let form = schmidt_decompose(&psi);
                let p = form.weights.as_slice();
                assert!((p[0] - alpha2.max(beta2)).abs() < 1e-12, "family {}", n + 1);
                assert!((p[1] - alpha2.min(beta2)).abs() < 1e-12);
                let (ea, fa, eb, fb) = *claim;
                let (big_e, big_f) = if alpha2 >= beta2 { (ea, fa) } else { (eb, fb) };
                assert!(
                    (overlap(&form.left_basis.col(0), big_e) - 1.0).abs() < 1e-10,
                    "family {}",
                    n + 1
                );
                assert!(
                    (overlap(&form.right_basis.col(0), big_f) - 1.0).abs() < 1e-10,
                    "family {}",
                    n + 1
                );
            }
        }
    }

    #[test]
    fn pseudo_pure_cases() {
        let psi = max_entangled::<f64>(3).unwrap();
        let dims = psi.dims();
        assert!(
            pseudo_pure(&psi, 0.0)
                .unwrap()
                .mat()
                .max_abs_diff(DensityMatrix::maximally_mixed(dims).mat())
                < 1e-15
        );
        assert!(
            pseudo_pure(&psi, 1.0)
                .unwrap()
                .mat()
                .max_abs_diff(density_from_pure(&psi).unwrap().mat())
                < 1e-15
        );
        assert!(matches!(
            pseudo_pure(&psi, 1.5),
            Err(Error::BadMixingParameter(_))
        ));
    }

    #[test]
    fn amplitude_damping_examples() {
        let t = tol();
        assert!(
            amplitude_damped(0.0)
                .unwrap()
                .mat()
                .max_abs_diff(phi_plus().mat())
                < 1e-15
        );
        let full = amplitude_damped(1.0f64).unwrap();
        let expect = Matrix::diag_real(&[0.5, 0.0, 0.5, 0.0]);
        assert!(full.mat().max_abs_diff(&expect) < 1e-15);
        let half = amplitude_damped(0.5f64).unwrap();
        assert!((half.mat()[(0, 3)].re - 0.5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((half.mat()[(2, 2)].re - 0.25).abs() < 1e-15);
        let negative = half
            .pt_eigenvalues(&t)
            .iter()
            .filter(|&&v| v < -t.eig_tol)
            .count();
        assert_eq!(negative, 1);
        assert!(matches!(amplitude_damped(1.5f64), Err(Error::BadGamma(_))));
    }

    #[test]
    fn amplitude_damping_npt_window() {
        let t = tol();
        for k in 0..=10 {
            let g = k as f64 / 10.0;
            let negative = amplitude_damped(g)
                .unwrap()
                .pt_eigenvalues(&t)
                .iter()
                .filter(|&&v| v < -t.eig_tol)
                .count();
            assert_eq!(negative, if k < 10 { 1 } else { 0 }, "gamma {g}");
        }
    }

    #[test]
    fn conjugate_local_cases() {
        let t = tol();
        let rho = phi_plus();
        let id = Matrix::identity(2);
        assert!(
            conjugate_local(&rho, &id, &id, &t)
                .unwrap()
                .mat()
                .max_abs_diff(rho.mat())
                < 1e-15
        );
        for (from, to) in [
            (BellKind::PsiPlus, BellKind::PhiPlus),
            (BellKind::PhiMinus, BellKind::PsiMinus),
        ] {
            let a = density_from_pure(&bell::<f64>(from)).unwrap();
            let b = density_from_pure(&bell::<f64>(to)).unwrap();
            let out = conjugate_local(&a, &id, &qubit::sigma_x(), &t).unwrap();
            assert!(out.mat().max_abs_diff(b.mat()) < 1e-15);
        }
        let bad = Matrix::diag_real(&[1.0, 2.0]);
        assert!(matches!(
            conjugate_local(&rho, &id, &bad, &t),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = tol();
        let rho = amplitude_damped(0.3f64).unwrap();
        let back = D::from_json_str(&rho.to_json_string(), &t).unwrap();
        assert!(back.mat().max_abs_diff(rho.mat()) < 1e-15);
        let not_state = r#"{"d_a":2,"d_b":2,"re":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,1]],"im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
        assert!(matches!(
            D::from_json_str(not_state, &t),
            Err(Error::NotAState(_))
        ));
        assert!(D::from_json_str("{\"d_a\": 2}", &t).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn bell_coords_round_trip(raw in prop::array::uniform4(0.0f64..1.0)) {
            let sum: f64 = raw.iter().sum();
            prop_assume!(sum > 1e-3);
            let t = tol();
            let c = BellDiagonalCoords::from_probabilities(raw.map(|x| x / sum), &t).unwrap();
            let back = BellDiagonalCoords::from_xyz(c.x(), c.y(), c.z(), &t).unwrap();
            for (a, b) in c.probabilities().iter().zip(back.probabilities()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn schmidt_reconstructs(da in 2usize..=4, db in 2usize..=4, raw in prop::collection::vec(-1.0f64..1.0, 32)) {
            let dims = BipartiteDims::new(da, db).unwrap();
            prop_assume!(raw.iter().take(2 * da * db).any(|x| x.abs() > 1e-3));
            let psi = random_pure(dims, &raw);
            let form = schmidt_decompose(&psi);
            let sum: f64 = form.weights.as_slice().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(form.left_basis.unitary_deviation() < 1e-10);
            prop_assert!(form.right_basis.unitary_deviation() < 1e-10);
            let back = form.reconstruct();
            let err = back.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-10);
        }

        #[test]
        fn pure_states_have_unit_purity(raw in prop::collection::vec(-1.0f64..1.0, 18)) {
            prop_assume!(raw.iter().any(|x| x.abs() > 1e-3));
            let psi = random_pure(BipartiteDims::square(3).unwrap(), &raw);
            let rho = density_from_pure(&psi).unwrap();
            prop_assert!((rho.purity() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pseudo_pure_is_state(raw in prop::collection::vec(-1.0f64..1.0, 18), p in 0.0f64..=1.0) {
            prop_assume!(raw.iter().any(|x| x.abs() > 1e-3));
            let t = tol();
            let psi = random_pure(BipartiteDims::square(3).unwrap(), &raw);
            let rho = pseudo_pure(&psi, p).unwrap();
            prop_assert!(D::new(rho.dims(), rho.mat().clone(), &t).is_ok());
        }
    }
}
