//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the solver is generic over (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion used for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Denominators (P - q, Q, q, theta) below this are rejected as degenerate.
    fn degeneracy_floor() -> Self {
        Self::lit(1e-12)
    }

    /// Relative tolerance for the algebraic identities of the coefficient matrices.
    fn identity_tol() -> Self;
}

impl Real for f64 {
    fn identity_tol() -> Self {
        1e-13
    }
}

impl Real for f32 {
    fn identity_tol() -> Self {
        // 1e-13 is below f32 resolution; scale with machine epsilon instead.
        f32::EPSILON * 64.0
    }
}

/// Largest absolute entry of a slice; zero for an empty slice.
pub fn max_abs<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}
