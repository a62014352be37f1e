use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::Debug;

/// Scalar type used by the pointwise formulas (weights, heat kernels, radius
/// schedules, closed-form identities).
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }
}

impl<T> Real for T where T: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {}
