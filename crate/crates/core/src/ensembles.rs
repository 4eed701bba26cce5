//! Seeded random matrices, unitaries and state ensembles.
//!
//! Every draw comes from an [`RngStream`]: a ChaCha8 generator keyed by a
//! 64-bit seed with an independent stream per `stream_id`, so Monte-Carlo
//! work can be sharded and replayed bit for bit.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::matcore::{hermitian_eigenvalues, kron};
use crate::matcore::{
    partial_transpose, psd_from_spectrum, qr_gram_schmidt, BipartiteDims, Matrix, Tolerance,
};
use crate::scalar::Real;
use crate::states::{DensityMatrix, PureState};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn exp1(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    /// Complex Gaussian with real and imaginary variance 1/2.
    pub fn complex_normal<T: Real>(&mut self) -> Complex<T> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex::new(T::of(self.normal() * s), T::of(self.normal() * s))
    }
}

/// `d x d` Ginibre matrix.
pub fn ginibre<T: Real>(d: usize, rng: &mut RngStream) -> Matrix<T> {
    let data = (0..d * d).map(|_| rng.complex_normal()).collect();
    Matrix::from_vec(d, d, data).expect("finite Gaussian draws")
}

/// `X X^dagger / tr(X X^dagger)`, normalizing any positive operator to a state.
fn normalized_gram<T: Real>(dims: BipartiteDims, x: &Matrix<T>) -> DensityMatrix<T> {
    let g = x * &x.dagger();
    let tr = g.trace().re;
    DensityMatrix::from_parts_unchecked(dims, g.scale(T::one() / tr))
}

/// Hilbert-Schmidt random state.
pub fn hs_density<T: Real>(dims: BipartiteDims, rng: &mut RngStream) -> DensityMatrix<T> {
    normalized_gram(dims, &ginibre(dims.total(), rng))
}

/// Bures random state `(I + U) H H^dagger (I + U)^dagger / tr(...)`.
pub fn bures_density<T: Real>(dims: BipartiteDims, rng: &mut RngStream) -> DensityMatrix<T> {
    let h = ginibre(dims.total(), rng);
    let u = haar_unitary(dims.total(), rng);
    bures_with_unitary(dims, &h, &u)
}

/// The Bures construction for a supplied Ginibre `h` and unitary `u`.
pub fn bures_with_unitary<T: Real>(
    dims: BipartiteDims,
    h: &Matrix<T>,
    u: &Matrix<T>,
) -> DensityMatrix<T> {
    let a = &Matrix::identity(dims.total()) + u;
    normalized_gram(dims, &(&a * h))
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<T: Real>(d: usize, rng: &mut RngStream) -> Matrix<T> {
    let (mut q, r) = qr_gram_schmidt(&ginibre::<T>(d, rng));
    for c in 0..d {
        let rc = r[(c, c)];
        let norm = rc.norm();
        if norm > T::zero() {
            let phase = rc / norm;
            for k in 0..d {
                q[(k, c)] *= phase;
            }
        }
    }
    q
}

fn gaussian_unit_vector<T: Real>(n: usize, rng: &mut RngStream) -> Vec<Complex<T>> {
    loop {
        let v: Vec<Complex<T>> = (0..n).map(|_| rng.complex_normal()).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::zero() {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-random pure state on the composite space.
pub fn haar_pure<T: Real>(dims: BipartiteDims, rng: &mut RngStream) -> PureState<T> {
    PureState::normalized(dims, gaussian_unit_vector(dims.total(), rng))
        .expect("unit Gaussian vector")
}

/// `sum_k q_k |a_k><a_k| (x) |b_k><b_k|` with flat-Dirichlet `q` and Haar
/// local vectors.
pub fn random_separable<T: Real>(
    dims: BipartiteDims,
    terms: usize,
    rng: &mut RngStream,
) -> DensityMatrix<T> {
    let terms = terms.max(1);
    let raw: Vec<f64> = (0..terms).map(|_| rng.exp1()).collect();
    let total: f64 = raw.iter().sum();
    let mut acc = Matrix::zeros(dims.total(), dims.total());
    for w in raw {
        let a = gaussian_unit_vector::<T>(dims.d_a, rng);
        let b = gaussian_unit_vector::<T>(dims.d_b, rng);
        let term = kron(&Matrix::outer(&a), &Matrix::outer(&b));
        acc = &acc + &term.scale(T::of(w / total));
    }
    DensityMatrix::from_parts_unchecked(dims, acc)
}

/// True iff the partial transpose has an eigenvalue below `-eig_tol`.
pub fn npt_filter<T: Real>(rho: &DensityMatrix<T>, tol: &Tolerance<T>) -> bool {
    min_pt_eigenvalue(rho, tol) < -tol.eig_tol
}

pub fn min_pt_eigenvalue<T: Real>(rho: &DensityMatrix<T>, tol: &Tolerance<T>) -> T {
    let pt = partial_transpose(rho.mat(), rho.dims()).expect("state dims");
    hermitian_eigenvalues(&pt, tol).expect("Hermitian")[0]
}

/// PPT test with the relative `is_psd` scaling.
pub fn is_ppt<T: Real>(rho: &DensityMatrix<T>, tol: &Tolerance<T>) -> bool {
    let pt = partial_transpose(rho.mat(), rho.dims()).expect("state dims");
    psd_from_spectrum(&hermitian_eigenvalues(&pt, tol).expect("Hermitian"), tol)
}
