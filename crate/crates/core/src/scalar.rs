//! Scalar abstractions shared by the two instances.
//!
//! Finite stochastic maps only need a field with an order, so they work over
//! `f32`, `f64` and exact rationals. The Gaussian instance needs spectral
//! decompositions and is bound to nalgebra's `RealField`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Entry type of a finite stochastic matrix.
pub trait Scalar:
    Clone + PartialOrd + Debug + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Slack allowed on row sums when validating a stochastic matrix.
    fn validation_tol() -> Self;
    /// Mass at or below which a point is treated as off-support.
    fn support_tol() -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::zero)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn validation_tol() -> Self {
        1e-9
    }
    fn support_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn validation_tol() -> Self {
        1e-5
    }
    fn support_tol() -> Self {
        1e-7
    }
}

impl Scalar for BigRational {
    fn validation_tol() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
    fn support_tol() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
}

/// Real field used by the Gaussian instance.
pub trait Real: nalgebra::RealField + Copy + Send + Sync + 'static {
    /// Relative singular-value cutoff for pseudoinverses and rank decisions.
    fn support_tol() -> Self;
    /// Allowed asymmetry of a covariance matrix, relative to its scale.
    fn symmetry_tol() -> Self;
    /// Most negative eigenvalue accepted for a covariance matrix.
    fn psd_tol() -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn to_f64_lossy(self) -> f64 {
        nalgebra::try_convert(self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn support_tol() -> Self {
        1e-12
    }
    fn symmetry_tol() -> Self {
        1e-12
    }
    fn psd_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn support_tol() -> Self {
        1e-5
    }
    fn symmetry_tol() -> Self {
        1e-5
    }
    fn psd_tol() -> Self {
        1e-5
    }
}
