//! Numerical laboratory for Riesz-like potentials and the sharp exponential
//! (Adams/Moser–Trudinger type) inequalities attached to them.
//!
//! The low-level numerics ([`special`], [`quad`], [`fit`]) are generic over
//! any [`Real`] scalar. The potential-theoretic layer works in `f64`.

pub mod experiment;
pub mod extremal;
pub mod field;
pub mod fit;
pub mod functional;
pub mod kernel;
pub mod poly;
pub mod potential;
pub mod quad;
pub mod rearrange;
pub mod special;

mod error;

pub use error::{Error, Result};

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point scalar accepted by the generic numerics.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

pub type GaussLegendre64 = quad::GaussLegendre<f64>;
pub type GaussLegendre32 = quad::GaussLegendre<f32>;
pub type QuadResult64 = quad::QuadResult<f64>;
pub type LinearFit64 = fit::LinearFit<f64>;
pub type LinearFit32 = fit::LinearFit<f32>;
