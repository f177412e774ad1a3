//! Dependent Bayesian lenses over two executable Markov categories.
//!
//! * [`finstoch`]: finite sets and row-stochastic matrices, over any
//!   [`Scalar`] (floats or exact rationals).
//! * [`gauss`]: affine maps with additive Gaussian noise, over any [`Real`].
//!
//! Both implement [`MarkovCategory`] and [`SupportCategory`], so supports,
//! inversion with support, charts, lenses and the law harness are written
//! once against those traits.

pub mod dynamic;
pub mod error;
pub mod finstoch;
pub mod gauss;
pub mod laws;
pub mod lenses;
pub mod markov;
pub mod scalar;
pub mod support;

pub use error::{Error, Result};
pub use finstoch::{FinAtom, FinObject, FinStoch, StochMap};
pub use gauss::{Gauss, GaussMap, GaussObject, InvertOptions};
pub use markov::{as_equal, as_equal_residual, marginals, Instance, MarkovCategory};
pub use scalar::{Real, Scalar};
pub use support::{
    bayes_invert_supported, restrict, InversionContext, SupportCategory, SupportObject,
};

/// Exact rationals for the finite instance.
pub type Rational = num_rational::BigRational;

pub type FinStoch64 = FinStoch<f64>;
pub type FinStoch32 = FinStoch<f32>;
pub type FinStochExact = FinStoch<Rational>;
pub type StochMap64 = StochMap<f64>;
pub type StochMapExact = StochMap<Rational>;

pub type Gauss64 = Gauss<f64>;
pub type Gauss32 = Gauss<f32>;
pub type GaussMap64 = GaussMap<f64>;
