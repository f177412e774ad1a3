//! Support objects, restriction along supports, and Bayesian inversion.
//!
//! A support of a state `π: I → X` is a carrier `X_π` with a section
//! `i: X_π → X` and retraction `r: X → X_π` such that `i ⨟ r = id` and
//! precomposition with `i` identifies π-almost-equal morphisms.

use crate::error::{Error, Result};
use crate::finstoch::{FinAtom, FinObject, FinStoch, StochMap};
use crate::gauss::{Gauss, GaussMap};
use crate::markov::{require_state, MarkovCategory};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone)]
pub struct SupportObject<C: MarkovCategory> {
    pub base: C::Object,
    pub state: C::Morphism,
    pub carrier: C::Object,
    pub section: C::Morphism,
    pub retraction: C::Morphism,
}

/// Markov categories with all supports of states and Bayesian inverses.
pub trait SupportCategory: MarkovCategory {
    fn default_tol() -> Self::Scalar;

    fn support(pi: &Self::Morphism, tol: &Self::Scalar) -> Result<SupportObject<Self>>;

    /// Some ordinary Bayesian inverse of `f` at `pi`.
    fn bayes_invert(
        f: &Self::Morphism,
        pi: &Self::Morphism,
        tol: &Self::Scalar,
    ) -> Result<Self::Morphism>;
}

/// `f_π = i_π ⨟ f ⨟ r_{π⨟f} : X_π → Y_{π⨟f}`.
pub fn restrict<C: SupportCategory>(
    f: &C::Morphism,
    pi: &C::Morphism,
    tol: &C::Scalar,
) -> Result<C::Morphism> {
    check_prior::<C>(f, pi)?;
    let prior = C::support(pi, tol)?;
    let pushed = C::support(&C::compose(pi, f)?, tol)?;
    crate::markov::compose_all::<C>(&[&prior.section, f, &pushed.retraction])
}

fn check_prior<C: MarkovCategory>(f: &C::Morphism, pi: &C::Morphism) -> Result<()> {
    require_state::<C>(pi)?;
    if C::cod(pi) != C::dom(f) {
        return Err(Error::DomainMismatch {
            left: C::describe(C::cod(pi)),
            right: C::describe(C::dom(f)),
        });
    }
    Ok(())
}

/// Everything needed to move between ordinary inverses `Y → X` and inverses
/// with support `Y_{π⨟f} → X_π`.
#[derive(Debug, Clone)]
pub struct InversionContext<C: MarkovCategory> {
    pub map: C::Morphism,
    pub prior: SupportObject<C>,
    pub pushforward: SupportObject<C>,
}

impl<C: SupportCategory> InversionContext<C> {
    pub fn new(f: &C::Morphism, pi: &C::Morphism, tol: &C::Scalar) -> Result<Self> {
        check_prior::<C>(f, pi)?;
        let prior = C::support(pi, tol)?;
        let pushforward = C::support(&C::compose(pi, f)?, tol)?;
        Ok(Self {
            map: f.clone(),
            prior,
            pushforward,
        })
    }

    pub fn state(&self) -> &C::Morphism {
        &self.prior.state
    }

    pub fn pushforward_state(&self) -> &C::Morphism {
        &self.pushforward.state
    }

    /// Ψ(g) = r_{π⨟f} ⨟ g ⨟ i_π.
    pub fn to_ordinary(&self, g: &C::Morphism) -> Result<C::Morphism> {
        self.expect_signature(g, &self.pushforward.carrier, &self.prior.carrier)?;
        crate::markov::compose_all::<C>(&[&self.pushforward.retraction, g, &self.prior.section])
    }

    /// Ψ̃(h) = i_{π⨟f} ⨟ h ⨟ r_π.
    pub fn to_supported(&self, h: &C::Morphism) -> Result<C::Morphism> {
        self.expect_signature(h, &self.pushforward.base, &self.prior.base)?;
        crate::markov::compose_all::<C>(&[&self.pushforward.section, h, &self.prior.retraction])
    }

    pub fn ordinary_inverse(&self, tol: &C::Scalar) -> Result<C::Morphism> {
        C::bayes_invert(&self.map, &self.prior.state, tol)
    }

    pub fn supported_inverse(&self, tol: &C::Scalar) -> Result<C::Morphism> {
        self.to_supported(&self.ordinary_inverse(tol)?)
    }

    fn expect_signature(
        &self,
        m: &C::Morphism,
        dom: &C::Object,
        cod: &C::Object,
    ) -> Result<()> {
        if C::dom(m) != dom || C::cod(m) != cod {
            return Err(Error::SignatureMismatch(format!(
                "expected {} -> {}, found {} -> {}",
                C::describe(dom),
                C::describe(cod),
                C::describe(C::dom(m)),
                C::describe(C::cod(m)),
            )));
        }
        Ok(())
    }
}

/// The unique Bayesian inverse with support `f♯_π : Y_{π⨟f} → X_π`.
pub fn bayes_invert_supported<C: SupportCategory>(
    f: &C::Morphism,
    pi: &C::Morphism,
    tol: &C::Scalar,
) -> Result<C::Morphism> {
    InversionContext::<C>::new(f, pi, tol)?.supported_inverse(tol)
}

/// Support of a finite state: the points with mass above `tol`, in domain
/// order. The retraction sends every off-support point to the first support
/// point.
pub fn finite_support<S: Scalar>(pi: &StochMap<S>, tol: &S) -> Result<SupportObject<FinStoch<S>>> {
    require_state::<FinStoch<S>>(pi)?;
    let base = pi.cod().clone();
    let kept: Vec<usize> = pi
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, p)| *p > tol)
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptySupport {
            tol: tol.to_f64_lossy(),
        });
    }
    if kept.len() == base.size() {
        let id = StochMap::identity(&base);
        return Ok(SupportObject {
            carrier: base.clone(),
            base,
            state: pi.clone(),
            section: id.clone(),
            retraction: id,
        });
    }
    let carrier = FinObject::from_atom(FinAtom::new(kept.iter().map(|&i| base.label(i)))?);
    let section = StochMap::deterministic(carrier.clone(), base.clone(), |j| kept[j])?;
    let mut slot = vec![0usize; base.size()];
    for (j, &i) in kept.iter().enumerate() {
        slot[i] = j;
    }
    let retraction = StochMap::deterministic(base.clone(), carrier.clone(), |i| slot[i])?;
    Ok(SupportObject {
        base,
        state: pi.clone(),
        carrier,
        section,
        retraction,
    })
}

/// Ordinary inverse from the joint table `J(x, y) = π(x) f(x, y)`.
///
/// Observations with predictive mass at or below `tol` get the Dirac row at
/// the first supported point of `π`.
pub fn finite_invert<S: Scalar>(f: &StochMap<S>, pi: &StochMap<S>, tol: &S) -> Result<StochMap<S>> {
    check_prior::<FinStoch<S>>(f, pi)?;
    let prior = pi.probs();
    let fallback = prior
        .iter()
        .position(|p| p > tol)
        .ok_or(Error::EmptySupport {
            tol: tol.to_f64_lossy(),
        })?;
    let (m, n) = (f.n_rows(), f.n_cols());
    let predictive = pi.compose(f)?;
    let q = predictive.probs();
    let mut entries = vec![S::zero(); n * m];
    for y in 0..n {
        if q[y] > *tol {
            for x in 0..m {
                entries[y * m + x] = prior[x].clone() * f.get(x, y).clone() / q[y].clone();
            }
        } else {
            entries[y * m + fallback] = S::one();
        }
    }
    StochMap::from_entries_unchecked(f.cod().clone(), f.dom().clone(), entries)
}

impl<S: Scalar> SupportCategory for FinStoch<S> {
    fn default_tol() -> S {
        S::support_tol()
    }

    fn support(pi: &StochMap<S>, tol: &S) -> Result<SupportObject<Self>> {
        finite_support(pi, tol)
    }

    fn bayes_invert(f: &StochMap<S>, pi: &StochMap<S>, tol: &S) -> Result<StochMap<S>> {
        finite_invert(f, pi, tol)
    }
}

impl<T: Real> SupportCategory for Gauss<T> {
    fn default_tol() -> T {
        T::support_tol()
    }

    fn support(pi: &GaussMap<T>, tol: &T) -> Result<SupportObject<Self>> {
        pi.support(*tol)
    }

    fn bayes_invert(f: &GaussMap<T>, pi: &GaussMap<T>, tol: &T) -> Result<GaussMap<T>> {
        check_prior::<Self>(f, pi)?;
        f.invert(pi, *tol)
    }
}
