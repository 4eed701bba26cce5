//! Local Pauli / embedded Gell-Mann settings and the reconstruction of Delta
//! entries from their expectation values.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::matcore::{kron, BipartiteDims, Matrix, Tolerance};
use crate::scalar::Real;
use crate::states::DensityMatrix;
use crate::witness::{family_bases, Construction, DeltaMatrix, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `A (x) B` with both factors Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct LocalObservable<T> {
    pub a_op: Matrix<T>,
    pub b_op: Matrix<T>,
    pub label: String,
}

impl<T: Real> LocalObservable<T> {
    pub fn new(
        a_op: Matrix<T>,
        b_op: Matrix<T>,
        label: impl Into<String>,
        tol: &Tolerance<T>,
    ) -> Result<Self> {
        for op in [&a_op, &b_op] {
            let dev = op.hermitian_deviation();
            if !op.is_square() || dev > tol.eig_tol {
                return Err(Error::NotHermitian {
                    deviation: dev.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            a_op,
            b_op,
            label: label.into(),
        })
    }

    pub fn operator(&self) -> Matrix<T> {
        kron(&self.a_op, &self.b_op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    /// One of the six two-qubit families (1..=6).
    Family(usize),
    /// Computational-basis block `(i, j)`, `i < j`.
    Block(usize, usize),
}

/// Three correlated settings `X (x) X`, `Y (x) Y`, `Z (x) Z` on one block,
/// rotated into the plan's basis pair. Single-party terms come from the
/// marginals of the `Z (x) Z` setting.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct MeasurementPlan<T> {
    pub kind: PlanKind,
    pub dims: BipartiteDims,
    pub block: (usize, usize),
    pub observables: Vec<LocalObservable<T>>,
    pub reconstruction: Vec<String>,
    #[serde(skip)]
    a_basis: Matrix<T>,
    #[serde(skip)]
    b_basis: Matrix<T>,
}

pub fn pauli<T: Real>(axis: Axis) -> Matrix<T> {
    let (x, y, z) = embedded_ops::<T>(0, 1, 2).expect("qubit block");
    match axis {
        Axis::X => x,
        Axis::Y => y,
        Axis::Z => z,
    }
}

fn check_block(i: usize, j: usize, d: usize) -> Result<()> {
    if i < j && j < d {
        Ok(())
    } else {
        Err(Error::BadIndices { i, j, d })
    }
}

/// `(X_ij, Y_ij, Z_ij)` on `C^d`.
pub fn embedded_ops<T: Real>(
    i: usize,
    j: usize,
    d: usize,
) -> Result<(Matrix<T>, Matrix<T>, Matrix<T>)> {
    check_block(i, j, d)?;
    let one = Complex::new(T::one(), T::zero());
    let im = Complex::new(T::zero(), T::one());
    let mut x = Matrix::zeros(d, d);
    let mut y = Matrix::zeros(d, d);
    let mut z = Matrix::zeros(d, d);
    x[(i, j)] = one;
    x[(j, i)] = one;
    y[(i, j)] = -im;
    y[(j, i)] = im;
    z[(i, i)] = one;
    z[(j, j)] = -one;
    Ok((x, y, z))
}

fn block_projector<T: Real>(i: usize, j: usize, d: usize) -> Matrix<T> {
    Matrix::from_fn(d, d, |r, c| {
        if r == c && (r == i || r == j) {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// `tr((A (x) B) rho)`.
pub fn expectation_local<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &LocalObservable<T>,
    tol: &Tolerance<T>,
) -> Result<T> {
    let dims = rho.dims();
    if obs.a_op.rows() != dims.d_a || obs.b_op.rows() != dims.d_b {
        return Err(dim_mismatch(
            format!("{}x{}", dims.d_a, dims.d_b),
            format!("{}x{}", obs.a_op.rows(), obs.b_op.rows()),
        ));
    }
    let v = obs.operator().trace_product(rho.mat());
    if v.im.abs() > tol.eig_tol {
        return Err(Error::NotHermitian {
            deviation: v.im.abs().to_f64_lossy(),
        });
    }
    Ok(v.re)
}

fn rotate<T: Real>(u: &Matrix<T>, op: &Matrix<T>) -> Matrix<T> {
    &(u * op) * &u.dagger()
}

pub fn measurement_plan<T: Real>(
    kind: PlanKind,
    dims: BipartiteDims,
) -> Result<MeasurementPlan<T>> {
    let (block, a_basis, b_basis) = match kind {
        PlanKind::Family(n) => {
            if dims.d_a != 2 || dims.d_b != 2 {
                return Err(dim_mismatch(
                    "2x2 system",
                    format!("{}x{}", dims.d_a, dims.d_b),
                ));
            }
            let (e, f) = family_bases::<T>(n)?;
            ((0, 1), e, f)
        }
        PlanKind::Block(i, j) => {
            check_block(i, j, dims.min_dim())?;
            (
                (i, j),
                Matrix::identity(dims.d_a),
                Matrix::identity(dims.d_b),
            )
        }
    };
    let (i, j) = block;
    let (xa, ya, za) = embedded_ops::<T>(i, j, dims.d_a)?;
    let (xb, yb, zb) = embedded_ops::<T>(i, j, dims.d_b)?;
    let tol = Tolerance::default();
    let observables = [("X", xa, xb), ("Y", ya, yb), ("Z", za, zb)]
        .into_iter()
        .map(|(name, a, b)| {
            LocalObservable::new(
                rotate(&a_basis, &a),
                rotate(&b_basis, &b),
                format!("{name}{i}{j} (x) {name}{i}{j}"),
                &tol,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let reconstruction = vec![
        format!("D{i}{i} = 1/4 <(P+Z{i}{j}) (x) (P+Z{i}{j})>"),
        format!("D{j}{j} = 1/4 <(P-Z{i}{j}) (x) (P-Z{i}{j})>"),
        format!("D{i}{j} = 1/4 (<X{i}{j} (x) X{i}{j}> + <Y{i}{j} (x) Y{i}{j}>)"),
        format!("P = |{i}><{i}| + |{j}><{j}|, marginals of the Z setting"),
    ];
    Ok(MeasurementPlan {
        kind,
        dims,
        block,
        observables,
        reconstruction,
        a_basis,
        b_basis,
    })
}

impl<T: Real> MeasurementPlan<T> {
    /// The 2x2 Delta block, from expectation values of local products only.
    pub fn reconstruct(
        &self,
        rho: &DensityMatrix<T>,
        tol: &Tolerance<T>,
    ) -> Result<DeltaMatrix<T>> {
        if rho.dims() != self.dims {
            return Err(dim_mismatch(
                format!("{:?}", self.dims),
                format!("{:?}", rho.dims()),
            ));
        }
        let (i, j) = self.block;
        let quarter = T::of(0.25);
        let pa = rotate(&self.a_basis, &block_projector(i, j, self.dims.d_a));
        let pb = rotate(&self.b_basis, &block_projector(i, j, self.dims.d_b));
        let (za, zb) = (&self.observables[2].a_op, &self.observables[2].b_op);
        let ev = |a: Matrix<T>, b: Matrix<T>| {
            expectation_local(rho, &LocalObservable::new(a, b, "", tol)?, tol)
        };
        let d_ii = quarter * ev(&pa + za, &pb + zb)?;
        let d_jj = quarter * ev(&pa - za, &pb - zb)?;
        let xx = expectation_local(rho, &self.observables[0], tol)?;
        let yy = expectation_local(rho, &self.observables[1], tol)?;
        let d_ij = quarter * (xx + yy);
        DeltaMatrix::from_entries(
            2,
            vec![d_ii, d_ij, d_ij, d_jj],
            Provenance {
                construction: Construction::Transpose,
                label: format!("{:?} from expectations", self.kind),
            },
        )
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Computational-basis Delta block `(i, j)` rebuilt from local expectations.
pub fn delta_from_expectations<T: Real>(
    rho: &DensityMatrix<T>,
    block: (usize, usize),
    tol: &Tolerance<T>,
) -> Result<DeltaMatrix<T>> {
    measurement_plan(PlanKind::Block(block.0, block.1), rho.dims())?.reconstruct(rho, tol)
}
