//! Linear witness families, their Delta matrices and the minor hierarchy.
//!
//! For a fixed Schmidt basis pair `(E, F)`, the witnesses
//! `W(p) = sum_ij sqrt(p_i p_j) |e_i f_j><e_j f_i|` satisfy
//! `tr(W(p) rho) = q^T Delta(rho) q` with `q_i = sqrt(p_i)`, so `Delta` failing
//! to be positive semidefinite certifies entanglement for every member of the
//! family at once.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{dim_mismatch, Error, Result};
use crate::matcore::{
    determinant, hermitian_eigh, jacobi_eigh, kron, principal_submatrix, psd_from_spectrum,
    BipartiteDims, Matrix, Tolerance,
};
use crate::pncp::{adjoint, ChoiParams, PositiveMapTensor};
use crate::scalar::Real;
use crate::states::{conjugate_local, qubit, DensityMatrix, SchmidtWeights};

/// Hermitian operator on a bipartite space.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessOperator<T> {
    dims: BipartiteDims,
    mat: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Transpose,
    Map,
    Choi,
}

/// Which construction produced a Delta matrix, and in which basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub construction: Construction,
    pub label: String,
}

/// Real symmetric `k x k` matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaMatrix<T> {
    k: usize,
    entries: Vec<T>,
    provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Minor<T> {
    pub indices: Vec<usize>,
    pub determinant: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionVerdict<T> {
    pub psd: bool,
    pub min_eigenvalue: T,
    pub violating_minors: Vec<Minor<T>>,
}

impl<T: Real> DetectionVerdict<T> {
    /// Some principal minor is below `-det_tol`.
    pub fn detected(&self) -> bool {
        !self.violating_minors.is_empty()
    }
}

impl<T: Real> WitnessOperator<T> {
    pub fn new(dims: BipartiteDims, mat: Matrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        let n = dims.total();
        if mat.rows() != n || mat.cols() != n {
            return Err(dim_mismatch(
                format!("{n}x{n}"),
                format!("{}x{}", mat.rows(), mat.cols()),
            ));
        }
        let dev = mat.hermitian_deviation();
        if dev > tol.eig_tol * T::one().max(mat.max_abs()) {
            return Err(Error::NotHermitian {
                deviation: dev.to_f64_lossy(),
            });
        }
        Ok(Self { dims, mat })
    }

    pub(crate) fn from_parts_unchecked(dims: BipartiteDims, mat: Matrix<T>) -> Self {
        Self { dims, mat }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn mat(&self) -> &Matrix<T> {
        &self.mat
    }
}

impl<T: Real> DeltaMatrix<T> {
    /// Symmetrizes `raw` (row-major, `k x k`).
    pub fn from_entries(k: usize, raw: Vec<T>, provenance: Provenance) -> Result<Self> {
        if raw.len() != k * k {
            return Err(dim_mismatch(k * k, raw.len()));
        }
        let half = T::of(0.5);
        let mut entries = raw.clone();
        for i in 0..k {
            for j in 0..k {
                entries[i * k + j] = (raw[i * k + j] + raw[j * k + i]) * half;
            }
        }
        Ok(Self {
            k,
            entries,
            provenance,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.k + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.k).map(<[T]>::to_vec).collect()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        Matrix::from_fn(self.k, self.k, |i, j| {
            Complex::new(self.get(i, j), T::zero())
        })
    }

    pub fn determinant(&self) -> T {
        determinant(&self.to_matrix(), &Tolerance::default()).expect("symmetric")
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        jacobi_eigh(&self.to_matrix(), false).0
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    /// `q^T Delta q` with `q_i = sqrt(p_i)`; shorter `p` is zero-padded.
    pub fn quadratic_form(&self, p: &SchmidtWeights<T>) -> T {
        let q = p.sqrt_vec();
        let mut acc = T::zero();
        for (i, &qi) in q.iter().enumerate().take(self.k) {
            for (j, &qj) in q.iter().enumerate().take(self.k) {
                acc += qi * qj * self.get(i, j);
            }
        }
        acc
    }

    /// The principal minor on `idx`.
    pub fn minor(&self, idx: &[usize]) -> Result<T> {
        let sub = principal_submatrix(&self.to_matrix(), idx)?;
        determinant(&sub, &Tolerance::default())
    }
}

fn check_unitary<T: Real>(u: &Matrix<T>, d: usize, tol: &Tolerance<T>) -> Result<()> {
    if u.rows() != d || u.cols() != d {
        return Err(dim_mismatch(
            format!("{d}x{d} unitary"),
            format!("{}x{}", u.rows(), u.cols()),
        ));
    }
    let dev = u.unitary_deviation();
    if dev > tol.eig_tol {
        return Err(Error::NotUnitary(dev.to_f64_lossy()));
    }
    Ok(())
}

/// `W(p) = sum_ij sqrt(p_i p_j) |e_i f_j><e_j f_i|`, bases given as columns.
pub fn schmidt_family_witness<T: Real>(
    p: &SchmidtWeights<T>,
    e_basis: &Matrix<T>,
    f_basis: &Matrix<T>,
    tol: &Tolerance<T>,
) -> Result<WitnessOperator<T>> {
    let dims = BipartiteDims::new(e_basis.rows(), f_basis.rows())?;
    check_unitary(e_basis, dims.d_a, tol)?;
    check_unitary(f_basis, dims.d_b, tol)?;
    if p.len() > dims.min_dim() {
        return Err(Error::BadWeights(format!(
            "{} weights exceed the Schmidt rank bound {}",
            p.len(),
            dims.min_dim()
        )));
    }
    let q = p.sqrt_vec();
    let n = dims.total();
    let mut w = Matrix::zeros(n, n);
    for (i, &qi) in q.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            w[(dims.index(i, j), dims.index(j, i))] = Complex::new(qi * qj, T::zero());
        }
    }
    let uv = kron(e_basis, f_basis);
    let rotated = &(&uv * &w) * &uv.dagger();
    Ok(WitnessOperator { dims, mat: rotated })
}

/// `W(p) = sum_ij sqrt(p_i p_j) |i><j| (x) L^dagger(|i><j|)` on
/// `C^{d_out} (x) C^{d_in}`.
pub fn map_family_witness<T: Real>(
    p: &SchmidtWeights<T>,
    map: &PositiveMapTensor<T>,
) -> Result<WitnessOperator<T>> {
    let dims = BipartiteDims::new(map.d_out(), map.d_in())?;
    if p.len() > map.d_out() {
        return Err(dim_mismatch(
            format!("at most {} weights", map.d_out()),
            p.len(),
        ));
    }
    let adj = adjoint(map);
    let q = p.sqrt_vec();
    let n = dims.total();
    let mut w = Matrix::zeros(n, n);
    for (i, &qi) in q.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            let block = adj.apply_unit(i, j);
            for m in 0..dims.d_b {
                for l in 0..dims.d_b {
                    w[(dims.index(i, m), dims.index(j, l))] = block[(m, l)] * (qi * qj);
                }
            }
        }
    }
    Ok(WitnessOperator { dims, mat: w })
}

/// `W[a,b,c] = D[a,b,c] / 3 - |phi3+><phi3+|` with
/// `D = sum_i |i><i| (x) [(a+1)|i><i| + b|i+1><i+1| + c|i+2><i+2|]`.
pub fn choi_closed_form_witness<T: Real>(params: ChoiParams<T>) -> WitnessOperator<T> {
    let dims = BipartiteDims { d_a: 3, d_b: 3 };
    let third = T::one() / T::of(3.0);
    let mut w = Matrix::zeros(9, 9);
    for i in 0..3 {
        let weights = [
            (i, params.a + T::one()),
            ((i + 1) % 3, params.b),
            ((i + 2) % 3, params.c),
        ];
        for (j, wt) in weights {
            let r = dims.index(i, j);
            w[(r, r)] += Complex::new(wt * third, T::zero());
        }
        for k in 0..3 {
            w[(dims.index(i, i), dims.index(k, k))] -= Complex::new(third, T::zero());
        }
    }
    WitnessOperator { dims, mat: w }
}

/// `tr(W rho)`.
pub fn expectation<T: Real>(
    w: &WitnessOperator<T>,
    rho: &DensityMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<T> {
    if w.dims != rho.dims() {
        return Err(dim_mismatch(
            format!("{:?}", w.dims),
            format!("{:?}", rho.dims()),
        ));
    }
    let v = w.mat.trace_product(rho.mat());
    if v.im.abs() > tol.eig_tol * T::one().max(v.re.abs()) {
        return Err(Error::NotHermitian {
            deviation: v.im.abs().to_f64_lossy(),
        });
    }
    Ok(v.re)
}

fn computational_delta<T: Real>(rho: &DensityMatrix<T>, label: String) -> DeltaMatrix<T> {
    let k = rho.dims().min_dim();
    let mut raw = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            raw[i * k + j] = rho.entry(i, j, j, i).re;
        }
    }
    DeltaMatrix::from_entries(
        k,
        raw,
        Provenance {
            construction: Construction::Transpose,
            label,
        },
    )
    .expect("k*k entries")
}

/// `Delta_T(rho)_ij = Re rho'_{ij,ji}` with `rho' = (E^dagger (x) F^dagger) rho (E (x) F)`.
pub fn delta_t<T: Real>(
    rho: &DensityMatrix<T>,
    e_basis: &Matrix<T>,
    f_basis: &Matrix<T>,
    tol: &Tolerance<T>,
) -> Result<DeltaMatrix<T>> {
    let dims = rho.dims();
    check_unitary(e_basis, dims.d_a, tol)?;
    check_unitary(f_basis, dims.d_b, tol)?;
    let rotated = conjugate_local(rho, e_basis, f_basis, tol)?;
    Ok(computational_delta(&rotated, "custom basis".into()))
}

/// `Delta_T` in the computational bases of two qutrits.
pub fn qutrit_delta_t<T: Real>(rho: &DensityMatrix<T>) -> Result<DeltaMatrix<T>> {
    let dims = rho.dims();
    if dims.d_a != 3 || dims.d_b != 3 {
        return Err(dim_mismatch(
            "3x3 system",
            format!("{}x{}", dims.d_a, dims.d_b),
        ));
    }
    Ok(computational_delta(rho, "computational".into()))
}

/// `Delta_T` in the computational bases, any dimensions.
pub fn computational_delta_t<T: Real>(rho: &DensityMatrix<T>) -> DeltaMatrix<T> {
    computational_delta(rho, "computational".into())
}

/// `Delta_L(rho)_ij = sum_lm Re(rho_{il,jm} (L^dagger)_{ml,ji})`.
pub fn delta_lambda<T: Real>(
    rho: &DensityMatrix<T>,
    map: &PositiveMapTensor<T>,
) -> Result<DeltaMatrix<T>> {
    let dims = rho.dims();
    if dims.d_b != map.d_in() {
        return Err(dim_mismatch(
            format!("B dimension {}", map.d_in()),
            format!("B dimension {}", dims.d_b),
        ));
    }
    let adj = adjoint(map);
    let k = dims.d_a.min(map.d_out());
    let mut raw = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            let mut acc = T::zero();
            for l in 0..dims.d_b {
                for m in 0..dims.d_b {
                    acc += (rho.entry(i, l, j, m) * adj.coeff(m, l, j, i)).re;
                }
            }
            raw[i * k + j] = acc;
        }
    }
    DeltaMatrix::from_entries(
        k,
        raw,
        Provenance {
            construction: Construction::Map,
            label: "map".into(),
        },
    )
}

/// The qutrit matrix with diagonal `a rho_{ii,ii} + b rho_{i,i-1,i,i-1} +
/// c rho_{i,i-2,i,i-2}` (indices mod 3) and off-diagonal `-Re rho_{ii,jj}`.
pub fn delta_choi<T: Real>(
    rho: &DensityMatrix<T>,
    params: ChoiParams<T>,
) -> Result<DeltaMatrix<T>> {
    let dims = rho.dims();
    if dims.d_a != 3 || dims.d_b != 3 {
        return Err(dim_mismatch(
            "3x3 system",
            format!("{}x{}", dims.d_a, dims.d_b),
        ));
    }
    let mut raw = vec![T::zero(); 9];
    for i in 0..3 {
        let (m1, m2) = ((i + 2) % 3, (i + 1) % 3);
        raw[i * 3 + i] = params.a * rho.entry(i, i, i, i).re
            + params.b * rho.entry(i, m1, i, m1).re
            + params.c * rho.entry(i, m2, i, m2).re;
        for j in 0..3 {
            if j != i {
                raw[i * 3 + j] = -rho.entry(i, i, j, j).re;
            }
        }
    }
    DeltaMatrix::from_entries(
        3,
        raw,
        Provenance {
            construction: Construction::Choi,
            label: format!("a={} b={} c={}", params.a, params.b, params.c),
        },
    )
}

fn subsets(k: usize) -> Vec<Vec<usize>> {
    if k <= 3 {
        (1u32..(1 << k))
            .map(|mask| (0..k).filter(|b| mask & (1 << b) != 0).collect())
            .collect()
    } else {
        (1..=k).map(|n| (0..n).collect()).collect()
    }
}

/// All principal minors for `k <= 3` (leading minors beyond), flagging those
/// below `-det_tol`, plus the full eigenvalue verdict.
pub fn minor_hierarchy<T: Real>(delta: &DeltaMatrix<T>, tol: &Tolerance<T>) -> DetectionVerdict<T> {
    let m = delta.to_matrix();
    let eig = jacobi_eigh(&m, false).0;
    let violating_minors: Vec<Minor<T>> = subsets(delta.k)
        .into_iter()
        .filter_map(|idx| {
            let sub = principal_submatrix(&m, &idx).expect("valid subset");
            let det = determinant(&sub, tol).expect("symmetric");
            (det < -tol.det_tol).then_some(Minor {
                indices: idx,
                determinant: det,
            })
        })
        .collect();
    DetectionVerdict {
        psd: psd_from_spectrum(&eig, tol) && violating_minors.is_empty(),
        min_eigenvalue: eig[0],
        violating_minors,
    }
}

/// Tangent Schmidt weights of a boundary state: the kernel vector of a PSD
/// `Delta` squared entrywise, when it can be made nonnegative.
pub fn envelope_tangency<T: Real>(
    rho: &DensityMatrix<T>,
    delta: &DeltaMatrix<T>,
    tol: &Tolerance<T>,
) -> Option<SchmidtWeights<T>> {
    if delta.k > rho.dims().total() {
        return None;
    }
    let k = delta.k;
    let scale = delta.entries.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale <= tol.eig_tol {
        return SchmidtWeights::uniform(k).ok();
    }
    let (vals, vecs) = hermitian_eigh(&delta.to_matrix(), tol).ok()?;
    let zero_tol = tol.eig_tol * T::one().max(scale);
    if vals[0] < -zero_tol || vals[0] > zero_tol {
        return None;
    }
    let mut v: Vec<T> = (0..k).map(|r| vecs[(r, 0)].re).collect();
    let imag = (0..k)
        .map(|r| vecs[(r, 0)].im.abs())
        .fold(T::zero(), T::max);
    if imag > T::of(1e-8) {
        return None;
    }
    if v.iter().copied().sum::<T>() < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let clamp = T::of(1e-8);
    for x in &mut v {
        if *x < -clamp {
            return None;
        }
        if *x < T::zero() {
            *x = T::zero();
        }
    }
    if v.iter().any(|&x| x == T::zero()) {
        return None;
    }
    let p: Vec<T> = v.iter().map(|&x| x * x).collect();
    SchmidtWeights::from_unnormalized(&p).ok()
}

/// Basis pair `(E, conj F)` of one of the six two-qubit families whose
/// witnesses need only `sigma_a (x) sigma_a` measurements (`family` 1..=6).
/// With these bases `W(p)` is the partial transpose of the family's state.
pub fn family_bases<T: Real>(family: usize) -> Result<(Matrix<T>, Matrix<T>)> {
    let (z, x, y) = (qubit::z_pm::<T>(), qubit::x_pm::<T>(), qubit::y_pm::<T>());
    let b = |u: &[Complex<T>], v: &[Complex<T>]| qubit::basis(u, v);
    let (e, f) = match family {
        1 => (b(&z[0], &z[1]), b(&z[0], &z[1])),
        2 => (b(&z[0], &z[1]), b(&z[1], &z[0])),
        3 => (b(&x[0], &x[1]), b(&x[0], &x[1])),
        4 => (b(&x[1], &x[0]), b(&x[0], &x[1])),
        5 => (b(&y[1], &y[0]), b(&y[0], &y[1])),
        6 => (b(&y[0], &y[1]), b(&y[0], &y[1])),
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    Ok((e, f.conj()))
}

/// `Delta` of family `n` on a two-qubit state.
pub fn family_delta<T: Real>(
    rho: &DensityMatrix<T>,
    family: usize,
    tol: &Tolerance<T>,
) -> Result<DeltaMatrix<T>> {
    let (e, f) = family_bases(family)?;
    let mut d = delta_t(rho, &e, &f, tol)?;
    d.provenance.label = format!("family {family}");
    Ok(d)
}

/// Family witness `W(p)` in the family's basis pair.
pub fn family_witness<T: Real>(
    p: &SchmidtWeights<T>,
    family: usize,
    tol: &Tolerance<T>,
) -> Result<WitnessOperator<T>> {
    let (e, f) = family_bases(family)?;
    schmidt_family_witness(p, &e, &f, tol)
}
