//! Positive but not completely positive maps as dense coefficient tensors.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Result};
use crate::matcore::{BipartiteDims, Matrix, Tolerance};
use crate::scalar::Real;
use crate::states::PureState;
use crate::witness::WitnessOperator;

/// Linear map on matrices, `c(m, l, i, j) = <m| L(|i><j|) |l>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMapTensor<T> {
    d_in: usize,
    d_out: usize,
    coeffs: Vec<Complex<T>>,
}

/// Parameters of the generalized Choi map. The `1/(a+b+c)` normalization is
/// never applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PncpClass {
    pub valid: bool,
    pub indecomposable: bool,
    pub optimal: bool,
}

impl<T: Real> ChoiParams<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    /// Parameters of the adjoint map.
    pub fn swapped(&self) -> Self {
        Self::new(self.a, self.c, self.b)
    }
}

impl<T: Real> PositiveMapTensor<T> {
    pub fn from_fn(
        d_in: usize,
        d_out: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> Complex<T>,
    ) -> Self {
        let mut coeffs = Vec::with_capacity(d_out * d_out * d_in * d_in);
        for m in 0..d_out {
            for l in 0..d_out {
                for i in 0..d_in {
                    for j in 0..d_in {
                        coeffs.push(f(m, l, i, j));
                    }
                }
            }
        }
        Self {
            d_in,
            d_out,
            coeffs,
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    #[inline]
    pub fn coeff(&self, m: usize, l: usize, i: usize, j: usize) -> Complex<T> {
        self.coeffs[((m * self.d_out + l) * self.d_in + i) * self.d_in + j]
    }

    /// Largest violation of `c(m,l,i,j) = conj(c(l,m,j,i))`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for m in 0..self.d_out {
            for l in 0..self.d_out {
                for i in 0..self.d_in {
                    for j in 0..self.d_in {
                        worst = worst
                            .max((self.coeff(m, l, i, j) - self.coeff(l, m, j, i).conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// `sum_ij |i><j| (x) L(|i><j|)`.
    pub fn choi_matrix(&self) -> Matrix<T> {
        let (di, d) = (self.d_in, self.d_out);
        Matrix::from_fn(di * d, di * d, |r, c| {
            self.coeff(r % d, c % d, r / d, c / d)
        })
    }

    /// Image of the matrix unit `|i><j|`.
    pub fn apply_unit(&self, i: usize, j: usize) -> Matrix<T> {
        Matrix::from_fn(self.d_out, self.d_out, |m, l| self.coeff(m, l, i, j))
    }
}

pub fn apply<T: Real>(map: &PositiveMapTensor<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    if x.rows() != map.d_in || x.cols() != map.d_in {
        return Err(dim_mismatch(
            format!("{0}x{0}", map.d_in),
            format!("{}x{}", x.rows(), x.cols()),
        ));
    }
    Ok(Matrix::from_fn(map.d_out, map.d_out, |m, l| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..map.d_in {
            for j in 0..map.d_in {
                acc += map.coeff(m, l, i, j) * x[(i, j)];
            }
        }
        acc
    }))
}

/// Hilbert-Schmidt adjoint: `c'(i, j, m, l) = conj(c(m, l, i, j))`.
pub fn adjoint<T: Real>(map: &PositiveMapTensor<T>) -> PositiveMapTensor<T> {
    PositiveMapTensor::from_fn(map.d_out, map.d_in, |i, j, m, l| {
        map.coeff(m, l, i, j).conj()
    })
}

fn delta<T: Real>(a: usize, b: usize) -> Complex<T> {
    Complex::new(if a == b { T::one() } else { T::zero() }, T::zero())
}

pub fn transposition_map<T: Real>(d: usize) -> PositiveMapTensor<T> {
    PositiveMapTensor::from_fn(d, d, |m, l, i, j| delta::<T>(m, j) * delta(l, i))
}

/// `X -> I tr(X) - X`.
pub fn reduction_map<T: Real>(d: usize) -> PositiveMapTensor<T> {
    PositiveMapTensor::from_fn(d, d, |m, l, i, j| {
        delta::<T>(m, l) * delta::<T>(i, j) - delta::<T>(m, i) * delta::<T>(l, j)
    })
}

/// Qutrit map with diagonal `a X_mm + b X_{m+1,m+1} + c X_{m+2,m+2}` (indices
/// mod 3) and negated off-diagonal entries.
pub fn generalized_choi<T: Real>(params: ChoiParams<T>) -> PositiveMapTensor<T> {
    PositiveMapTensor::from_fn(3, 3, |m, l, i, j| {
        if m != l {
            return -delta::<T>(m, i) * delta(l, j);
        }
        if i != j {
            return delta(0, 1);
        }
        let w = match (i + 3 - m) % 3 {
            0 => params.a,
            1 => params.b,
            _ => params.c,
        };
        Complex::new(w, T::zero())
    })
}

/// Boundary of the optimal generalized Choi maps.
pub fn theta_params<T: Real>(theta: T) -> ChoiParams<T> {
    let (s, c) = theta.sin_cos();
    let two_thirds = T::of(2.0 / 3.0);
    let half = T::of(0.5);
    let r3 = T::of(3f64.sqrt());
    ChoiParams {
        a: two_thirds * (T::one() + c),
        b: two_thirds * (T::one() - c * half - s * r3 * half),
        c: two_thirds * (T::one() - c * half + s * r3 * half),
    }
}

/// Positivity, indecomposability and optimality of `Phi[a,b,c]`, with
/// `det_tol` slack on the boundary equalities.
pub fn validate_pncp<T: Real>(params: ChoiParams<T>, tol: &Tolerance<T>) -> PncpClass {
    let s = tol.det_tol;
    let ChoiParams { a, b, c } = params;
    let one = T::one();
    let two = T::of(2.0);
    let sum = a + b + c;
    let mut valid = a >= -s && a < two && sum >= two - s;
    if a <= one + s {
        valid &= b * c >= (one - a) * (one - a) - s;
    }
    PncpClass {
        valid,
        indecomposable: b * c < (two - a) * (two - a) / T::of(4.0) - s,
        optimal: (sum - two).abs() <= s,
    }
}

/// `(I (x) L^dagger)(|psi><psi|)`, applied block by block.
pub fn witness_via_choi<T: Real>(
    map: &PositiveMapTensor<T>,
    psi: &PureState<T>,
) -> Result<WitnessOperator<T>> {
    let dims = psi.dims();
    if dims.d_b != map.d_out {
        return Err(dim_mismatch(
            format!("B dimension {}", map.d_out),
            format!("B dimension {}", dims.d_b),
        ));
    }
    let adj = adjoint(map);
    let out_dims = BipartiteDims::new(dims.d_a, map.d_in)?;
    let amps = psi.amplitudes();
    let n = out_dims.total();
    let mut w = Matrix::zeros(n, n);
    for i in 0..dims.d_a {
        for k in 0..dims.d_a {
            let block = Matrix::from_fn(dims.d_b, dims.d_b, |j, l| {
                amps[dims.index(i, j)] * amps[dims.index(k, l)].conj()
            });
            let image = apply(&adj, &block)?;
            for m in 0..out_dims.d_b {
                for l in 0..out_dims.d_b {
                    w[(out_dims.index(i, m), out_dims.index(k, l))] = image[(m, l)];
                }
            }
        }
    }
    Ok(WitnessOperator::from_parts_unchecked(out_dims, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{hermitian_eigenvalues, is_psd};
    use crate::states::{bell, max_entangled, BellKind};
    use crate::witness::choi_closed_form_witness;
    use proptest::prelude::*;

    type Map = PositiveMapTensor<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn unit(d: usize, i: usize, j: usize) -> Matrix<f64> {
        let mut m = Matrix::zeros(d, d);
        m[(i, j)] = c(1.0, 0.0);
        m
    }

    fn from_raw(d: usize, raw: &[f64]) -> Matrix<f64> {
        Matrix::from_fn(d, d, |r, col| {
            c(raw[2 * (r * d + col)], raw[2 * (r * d + col) + 1])
        })
    }

    /// `tr(A^dagger L(B)) = tr(L^dagger(A)^dagger B)` on all matrix units.
    fn is_adjoint_pair(map: &Map, adj: &Map) -> bool {
        let (di, dout) = (map.d_in(), map.d_out());
        for a in 0..dout * dout {
            for b in 0..di * di {
                let ua = unit(dout, a / dout, a % dout);
                let ub = unit(di, b / di, b % di);
                let lhs = ua.dagger().trace_product(&apply(map, &ub).unwrap());
                let rhs = apply(adj, &ua).unwrap().dagger().trace_product(&ub);
                if (lhs - rhs).norm() > 1e-14 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn apply_examples() {
        let sy = Matrix::from_fn(2, 2, |r, col| match (r, col) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        assert_eq!(apply(&transposition_map(2), &sy).unwrap(), sy.scale(-1.0));
        assert_eq!(
            apply(&reduction_map(3), &unit(3, 0, 0)).unwrap(),
            Matrix::diag_real(&[0.0, 1.0, 1.0])
        );
        assert_eq!(
            apply(&reduction_map(3), &unit(3, 1, 1)).unwrap(),
            Matrix::diag_real(&[1.0, 0.0, 1.0])
        );
        let g = generalized_choi(ChoiParams::new(2.0, 0.0, 0.0));
        assert_eq!(
            apply(&g, &Matrix::identity(3)).unwrap(),
            Matrix::identity(3).scale(2.0)
        );
        assert_eq!(
            apply(&transposition_map(2), &unit(2, 0, 1)).unwrap(),
            unit(2, 1, 0)
        );
        assert!(apply(&g, &Matrix::identity(2)).is_err());
    }

    #[test]
    fn reduction_examples() {
        let r = reduction_map::<f64>(3);
        let out = apply(&r, &Matrix::identity(3).scale(1.0 / 3.0)).unwrap();
        assert!(out.max_abs_diff(&Matrix::identity(3).scale(2.0 / 3.0)) < 1e-15);
        assert_eq!(generalized_choi(ChoiParams::new(0.0, 1.0, 1.0)), r);
    }

    #[test]
    fn adjoints() {
        let t = transposition_map::<f64>(3);
        assert_eq!(adjoint(&t), t);
        let r = reduction_map::<f64>(3);
        assert_eq!(adjoint(&r), r);
        for (a, b, cc) in [
            (1.0, 1.0, 0.0),
            (0.3, 1.2, 0.7),
            (4.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        ] {
            let p = ChoiParams::new(a, b, cc);
            let g = generalized_choi(p);
            assert!(is_adjoint_pair(&g, &adjoint(&g)));
            assert_eq!(adjoint(&g), generalized_choi(p.swapped()));
            assert_eq!(adjoint(&adjoint(&g)), g);
        }
        // the Choi map and its dual
        assert_eq!(
            adjoint(&generalized_choi(ChoiParams::new(1.0, 1.0, 0.0))),
            generalized_choi(ChoiParams::new(1.0, 0.0, 1.0))
        );
    }

    #[test]
    fn choi_map_is_positive_not_cp() {
        let tol = Tolerance::default();
        let choi = generalized_choi(ChoiParams::new(1.0, 1.0, 0.0));
        let ev = hermitian_eigenvalues(&choi.choi_matrix(), &tol).unwrap();
        assert!(ev[0] < -0.5);
        assert!(validate_pncp(ChoiParams::new(1.0, 1.0, 0.0), &tol).valid);
    }

    #[test]
    fn transposition_choi_matrix_is_swap() {
        let t = transposition_map::<f64>(3);
        let mut swap = Matrix::zeros(9, 9);
        for i in 0..3 {
            for j in 0..3 {
                swap[(i * 3 + j, j * 3 + i)] = c(1.0, 0.0);
            }
        }
        assert_eq!(t.choi_matrix(), swap);
    }

    #[test]
    fn theta_examples() {
        let p = theta_params(0.0f64);
        assert!(
            (p.a - 4.0 / 3.0).abs() < 1e-15
                && (p.b - 1.0 / 3.0).abs() < 1e-15
                && (p.c - 1.0 / 3.0).abs() < 1e-15
        );
        let p = theta_params(std::f64::consts::PI);
        assert!(p.a.abs() < 1e-15 && (p.b - 1.0).abs() < 1e-15 && (p.c - 1.0).abs() < 1e-15);
        let tol = Tolerance::default();
        for k in 0..100 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 100.0;
            let p = theta_params(th);
            assert!((p.a + p.b + p.c - 2.0).abs() < 1e-12);
            let class = validate_pncp(p, &tol);
            assert!(class.valid && class.optimal, "theta {th}: {p:?}");
        }
    }

    #[test]
    fn validation_examples() {
        let tol = Tolerance::default();
        assert_eq!(
            validate_pncp(ChoiParams::new(0.0, 1.0, 1.0), &tol),
            PncpClass {
                valid: true,
                indecomposable: false,
                optimal: true
            }
        );
        assert!(!validate_pncp(ChoiParams::new(2.0, 1.0, 1.0), &tol).valid);
        assert_eq!(
            validate_pncp(ChoiParams::new(1.0, 0.3, 0.8), &tol),
            PncpClass {
                valid: true,
                indecomposable: true,
                optimal: false
            }
        );
        assert!(!validate_pncp(ChoiParams::new(0.5, 0.8, 0.2), &tol).valid);
    }

    #[test]
    fn witness_via_transposition_is_half_swap() {
        let w = witness_via_choi(&transposition_map(2), &bell::<f64>(BellKind::PhiPlus)).unwrap();
        let mut swap = Matrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = c(0.5, 0.0);
            }
        }
        assert!(w.mat().max_abs_diff(&swap) < 1e-15);
    }

    #[test]
    fn witness_via_choi_matches_closed_form() {
        let phi3 = max_entangled::<f64>(3).unwrap();
        for a in [0.0, 0.5, 1.0, 1.5] {
            for (b, cc) in [
                (0.0, 1.0),
                (1.0, 1.0),
                (0.3, 0.8),
                (2.0, 0.1),
                (1.0 / 3.0, 4.0 / 3.0),
            ] {
                let p = ChoiParams::new(a, b, cc);
                let via = witness_via_choi(&generalized_choi(p), &phi3).unwrap();
                let closed = choi_closed_form_witness(p);
                assert!(via.mat().max_abs_diff(closed.mat()) < 1e-12, "{p:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn maps_preserve_hermiticity(th in 0.0f64..6.3, raw in prop::collection::vec(-1.0f64..1.0, 18)) {
            for map in [transposition_map(3), reduction_map(3), generalized_choi(theta_params(th))] {
                prop_assert!(map.hermiticity_defect() == 0.0);
                let m = from_raw(3, &raw);
                let h = &m + &m.dagger();
                prop_assert!(apply(&map, &h).unwrap().hermitian_deviation() < 1e-14);
            }
        }

        #[test]
        fn theta_maps_are_positive(th in 0.0f64..6.3, raw in prop::collection::vec(-1.0f64..1.0, 18)) {
            let tol = Tolerance::default();
            let m = from_raw(3, &raw);
            let psd = &m.dagger() * &m;
            prop_assert!(is_psd(&apply(&generalized_choi(theta_params(th)), &psd).unwrap(), &tol).unwrap());
        }

        #[test]
        fn reduction_is_trace_minus_identity(raw in prop::collection::vec(-1.0f64..1.0, 18)) {
            let x = from_raw(3, &raw);
            let expect = &Matrix::identity(3).scale_complex(x.trace()) - &x;
            let got = apply(&generalized_choi(ChoiParams::new(0.0, 1.0, 1.0)), &x).unwrap();
            prop_assert!(got.max_abs_diff(&expect) < 1e-12);
        }

        #[test]
        fn generalized_choi_on_identity(a in 0.0f64..2.0, b in 0.0f64..2.0, cc in 0.0f64..2.0) {
            let out = apply(&generalized_choi(ChoiParams::new(a, b, cc)), &Matrix::identity(3)).unwrap();
            prop_assert!(out.max_abs_diff(&Matrix::identity(3).scale(a + b + cc)) < 1e-14);
        }

        #[test]
        fn witness_via_choi_is_hermitian(raw in prop::collection::vec(-1.0f64..1.0, 18), th in 0.0f64..6.3) {
            prop_assume!(raw.iter().any(|x| x.abs() > 1e-3));
            let dims = BipartiteDims::square(3).unwrap();
            let amps = (0..9).map(|k| c(raw[2 * k], raw[2 * k + 1])).collect();
            let psi = PureState::normalized(dims, amps).unwrap();
            let w = witness_via_choi(&generalized_choi(theta_params(th)), &psi).unwrap();
            prop_assert!(w.mat().hermitian_deviation() < 1e-14);
        }
    }
}
