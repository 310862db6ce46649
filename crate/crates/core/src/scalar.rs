use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar the models are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; every finite `f64` is representable (possibly rounded).
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Feasibility / optimality tolerance used by the LP layer.
    fn lp_tolerance() -> Self {
        let eps = Self::epsilon().sqrt() * Self::lit(0.1);
        eps.max(Self::lit(1e-9))
    }

    /// Absolute slack allowed when checking SINR inequalities on scaled magnitudes.
    fn sinr_tolerance() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_follow_precision() {
        assert!(f64::lp_tolerance() < 1e-8);
        assert!(f32::lp_tolerance() > 1e-6);
        assert_eq!(f64::sinr_tolerance(), 1e-9);
        assert!(f32::sinr_tolerance() > 1e-9);
    }
}
