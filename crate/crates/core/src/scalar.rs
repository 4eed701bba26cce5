//! The floating-point scalar the numerical core is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type backing every complex matrix in the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Default eigenvalue tolerance for verdicts at this precision.
    const DEFAULT_EIG_TOL: f64;
    /// Default determinant tolerance for verdicts at this precision.
    const DEFAULT_DET_TOL: f64;

    /// Converts a literal. Panics only if the value is not representable at all.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const DEFAULT_EIG_TOL: f64 = 1e-9;
    const DEFAULT_DET_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const DEFAULT_EIG_TOL: f64 = 1e-4;
    const DEFAULT_DET_TOL: f64 = 1e-5;
}
