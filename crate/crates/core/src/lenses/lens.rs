use std::fmt;
use std::sync::Arc;

use super::family::ChartObject;
use super::{check_base, check_fibre};
use crate::error::Result;
use crate::markov::{require_state, split_marginals, MarkovCategory};
use crate::support::{bayes_invert_supported, SupportCategory};

type BackwardFn<C> = dyn Fn(&<C as MarkovCategory>::Morphism) -> Result<<C as MarkovCategory>::Morphism>
    + Send
    + Sync;

/// A dependent Bayesian lens: `f: X → Y` with backward maps
/// `B(π ⨟ f) → A(π)` for every prior `π` on `X`.
pub struct Lens<C: MarkovCategory> {
    dom: ChartObject<C>,
    cod: ChartObject<C>,
    forward: C::Morphism,
    backward: Arc<BackwardFn<C>>,
}

impl<C: MarkovCategory> Clone for Lens<C> {
    fn clone(&self) -> Self {
        Self {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            forward: self.forward.clone(),
            backward: Arc::clone(&self.backward),
        }
    }
}

impl<C: MarkovCategory> fmt::Debug for Lens<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lens")
            .field("dom", &self.dom)
            .field("cod", &self.cod)
            .field("forward", &self.forward)
            .finish_non_exhaustive()
    }
}

impl<C: MarkovCategory> Lens<C> {
    pub fn new(
        dom: ChartObject<C>,
        cod: ChartObject<C>,
        forward: C::Morphism,
        backward: impl Fn(&C::Morphism) -> Result<C::Morphism> + Send + Sync + 'static,
    ) -> Result<Self> {
        check_base::<C>(&forward, dom.forward(), cod.forward())?;
        Ok(Self {
            dom,
            cod,
            forward,
            backward: Arc::new(backward),
        })
    }

    pub fn identity(obj: &ChartObject<C>) -> Self {
        let family = obj.clone();
        Self::new(obj.clone(), obj.clone(), C::identity(obj.forward()), move |pi| {
            Ok(C::identity(&family.at(pi)?))
        })
        .expect("identity lens is well typed")
    }

    pub fn dom(&self) -> &ChartObject<C> {
        &self.dom
    }

    pub fn cod(&self) -> &ChartObject<C> {
        &self.cod
    }

    pub fn forward(&self) -> &C::Morphism {
        &self.forward
    }

    /// The backward map `B(π ⨟ f) → A(π)`, checked against both families.
    pub fn backward_at(&self, pi: &C::Morphism) -> Result<C::Morphism> {
        require_state::<C>(pi)?;
        let m = (self.backward)(pi)?;
        let pushed = C::compose(pi, &self.forward)?;
        check_fibre::<C>("lens backward map", &m, &self.cod.at(&pushed)?, &self.dom.at(pi)?)?;
        Ok(m)
    }

    /// Forward maps compose; backward maps compose in reverse,
    /// `g♯_{π⨟f} ⨟ f♯_π`.
    pub fn compose(&self, next: &Self) -> Result<Self> {
        check_base::<C>(&next.forward, self.cod.forward(), next.cod.forward())?;
        let forward = C::compose(&self.forward, &next.forward)?;
        let (first, second) = (self.clone(), next.clone());
        Self::new(self.dom.clone(), next.cod.clone(), forward, move |pi| {
            let pushed = C::compose(pi, &first.forward)?;
            C::compose(&second.backward_at(&pushed)?, &first.backward_at(pi)?)
        })
    }

    /// Backward map at `π` is `f♯_{π_L} ⊗ g♯_{π_R}`.
    pub fn tensor(&self, other: &Self) -> Self {
        let forward = C::tensor(&self.forward, &other.forward);
        let (left, right) = (self.clone(), other.clone());
        Self::new(
            self.dom.tensor(&other.dom),
            self.cod.tensor(&other.cod),
            forward,
            move |pi| {
                let (l, r) = split_marginals::<C>(pi, left.dom.forward())?;
                Ok(C::tensor(&left.backward_at(&l)?, &right.backward_at(&r)?))
            },
        )
        .expect("tensor of lenses is well typed")
    }
}

/// The section `S`: `f` paired with its inverses with support.
pub fn section_s<C: SupportCategory>(f: &C::Morphism, tol: C::Scalar) -> Lens<C> {
    let dom = ChartObject::supports(C::dom(f).clone(), tol.clone());
    let cod = ChartObject::supports(C::cod(f).clone(), tol.clone());
    let base = f.clone();
    Lens::new(dom, cod, f.clone(), move |pi| {
        bayes_invert_supported::<C>(&base, pi, &tol)
    })
    .expect("section lens is well typed")
}

/// A non-dependent lens `⟨X, S⟩ ⇄ ⟨Y, R⟩` with constant families.
pub fn stat_lens<C: MarkovCategory>(
    forward: C::Morphism,
    s: C::Object,
    r: C::Object,
    backward: impl Fn(&C::Morphism) -> Result<C::Morphism> + Send + Sync + 'static,
) -> Result<Lens<C>> {
    let dom = ChartObject::constant(C::dom(&forward).clone(), s);
    let cod = ChartObject::constant(C::cod(&forward).clone(), r);
    Lens::new(dom, cod, forward, backward)
}
