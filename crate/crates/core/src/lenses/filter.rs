use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::finstoch::{FinObject, FinStoch, StochMap};
use crate::gauss::{Gauss, GaussMap, GaussObject};
use crate::markov::MarkovCategory;
use crate::scalar::{Real, Scalar};
use crate::support::{InversionContext, SupportCategory};

/// Instances whose objects have points that can be observed.
pub trait PointObservation: SupportCategory {
    type Point: Clone + std::fmt::Debug;

    /// The Dirac state at `point`.
    fn point_state(obj: &Self::Object, point: &Self::Point) -> Result<Self::Morphism>;

    /// Log predictive probability (or density) of `point` under `q`.
    ///
    /// Fails with `UnsupportedObservation` off the support of `q`.
    fn log_predictive(q: &Self::Morphism, point: &Self::Point, tol: &Self::Scalar) -> Result<f64>;
}

impl<S: Scalar> PointObservation for FinStoch<S> {
    type Point = usize;

    fn point_state(obj: &FinObject, point: &usize) -> Result<StochMap<S>> {
        StochMap::point(obj.clone(), *point)
    }

    fn log_predictive(q: &StochMap<S>, point: &usize, tol: &S) -> Result<f64> {
        let size = q.n_cols();
        let mass = q
            .probs()
            .get(*point)
            .ok_or(Error::IndexOutOfRange { index: *point, size })?;
        if mass <= tol {
            return Err(Error::UnsupportedObservation {
                observation: q.cod().label(*point),
                mass: mass.to_f64_lossy(),
            });
        }
        Ok(mass.to_f64_lossy().ln())
    }
}

impl<T: Real> PointObservation for Gauss<T> {
    type Point = DVector<T>;

    fn point_state(obj: &GaussObject, point: &DVector<T>) -> Result<GaussMap<T>> {
        if point.len() != obj.dim() {
            return Err(Error::DimMismatch(format!(
                "observation of length {} in dimension {}",
                point.len(),
                obj.dim()
            )));
        }
        GaussMap::dirac(obj.clone(), point.clone())
    }

    fn log_predictive(q: &GaussMap<T>, point: &DVector<T>, tol: &T) -> Result<f64> {
        Ok(q.log_density(point, *tol)?.to_f64_lossy())
    }
}

/// Result of one predict/update cycle.
#[derive(Debug, Clone)]
pub struct FilterStep<C: MarkovCategory> {
    pub belief: C::Morphism,
    /// Log predictive probability (or density) of the observation.
    pub log_predictive: f64,
}

/// Predict with `dynamics`, then update on `obs` through the inverse with
/// support of `observe` at the predicted prior, read back on `X` via the
/// section of the prior's support.
pub fn filter_step<C: PointObservation>(
    belief: &C::Morphism,
    dynamics: &C::Morphism,
    observe: &C::Morphism,
    obs: &C::Point,
    tol: &C::Scalar,
) -> Result<FilterStep<C>> {
    let predicted = C::compose(belief, dynamics)?;
    let ctx = InversionContext::<C>::new(observe, &predicted, tol)?;
    let log_predictive = C::log_predictive(ctx.pushforward_state(), obs, tol)?;
    let sharp = ctx.supported_inverse(tol)?;
    let posterior = ctx.to_ordinary(&sharp)?;
    let point = C::point_state(C::cod(observe), obs)?;
    Ok(FilterStep {
        belief: C::compose(&point, &posterior)?,
        log_predictive,
    })
}
