use std::fmt;
use std::sync::Arc;

use super::family::ChartObject;
use super::oplax::oplax_gamma;
use super::{check_base, check_fibre};
use crate::error::Result;
use crate::markov::{require_state, split_marginals, MarkovCategory};
use crate::support::{restrict, SupportCategory};

type FibreFn<C> = dyn Fn(&<C as MarkovCategory>::Morphism) -> Result<<C as MarkovCategory>::Morphism>
    + Send
    + Sync;

/// A morphism of Bayesian charts: `f: X → Y` with forward fibre maps
/// `A(π) → B(π ⨟ f)`.
pub struct Chart<C: MarkovCategory> {
    dom: ChartObject<C>,
    cod: ChartObject<C>,
    base: C::Morphism,
    fibre: Arc<FibreFn<C>>,
}

impl<C: MarkovCategory> Clone for Chart<C> {
    fn clone(&self) -> Self {
        Self {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            base: self.base.clone(),
            fibre: Arc::clone(&self.fibre),
        }
    }
}

impl<C: MarkovCategory> fmt::Debug for Chart<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("dom", &self.dom)
            .field("cod", &self.cod)
            .field("base", &self.base)
            .finish_non_exhaustive()
    }
}

impl<C: MarkovCategory> Chart<C> {
    pub fn new(
        dom: ChartObject<C>,
        cod: ChartObject<C>,
        base: C::Morphism,
        fibre: impl Fn(&C::Morphism) -> Result<C::Morphism> + Send + Sync + 'static,
    ) -> Result<Self> {
        check_base::<C>(&base, dom.forward(), cod.forward())?;
        Ok(Self {
            dom,
            cod,
            base,
            fibre: Arc::new(fibre),
        })
    }

    pub fn identity(obj: &ChartObject<C>) -> Self {
        let family = obj.clone();
        Self::new(obj.clone(), obj.clone(), C::identity(obj.forward()), move |pi| {
            Ok(C::identity(&family.at(pi)?))
        })
        .expect("identity chart is well typed")
    }

    pub fn dom(&self) -> &ChartObject<C> {
        &self.dom
    }

    pub fn cod(&self) -> &ChartObject<C> {
        &self.cod
    }

    /// Projection to the base category.
    pub fn base(&self) -> &C::Morphism {
        &self.base
    }

    /// The fibre map `A(π) → B(π ⨟ f)`, checked against both families.
    pub fn fibre_at(&self, pi: &C::Morphism) -> Result<C::Morphism> {
        require_state::<C>(pi)?;
        let m = (self.fibre)(pi)?;
        let pushed = C::compose(pi, &self.base)?;
        check_fibre::<C>("chart fibre", &m, &self.dom.at(pi)?, &self.cod.at(&pushed)?)?;
        Ok(m)
    }

    pub fn compose(&self, next: &Self) -> Result<Self> {
        check_base::<C>(&next.base, self.cod.forward(), next.cod.forward())?;
        let base = C::compose(&self.base, &next.base)?;
        let (first, second) = (self.clone(), next.clone());
        Self::new(self.dom.clone(), next.cod.clone(), base, move |pi| {
            let pushed = C::compose(pi, &first.base)?;
            C::compose(&first.fibre_at(pi)?, &second.fibre_at(&pushed)?)
        })
    }

    /// `(f, f♭) ⊗ (g, g♭)` with fibre `f♭_{π_L} ⊗ g♭_{π_R}`.
    pub fn tensor(&self, other: &Self) -> Self {
        let base = C::tensor(&self.base, &other.base);
        let (left, right) = (self.clone(), other.clone());
        Self::new(
            self.dom.tensor(&other.dom),
            self.cod.tensor(&other.cod),
            base,
            move |pi| {
                let (l, r) = split_marginals::<C>(pi, left.dom.forward())?;
                Ok(C::tensor(&left.fibre_at(&l)?, &right.fibre_at(&r)?))
            },
        )
        .expect("tensor of charts is well typed")
    }

    /// Symmetry `⟨X, A⟩ ⊗ ⟨Y, B⟩ → ⟨Y, B⟩ ⊗ ⟨X, A⟩`.
    pub fn swap(a: &ChartObject<C>, b: &ChartObject<C>) -> Self {
        let (fa, fb) = (a.clone(), b.clone());
        Self::new(
            a.tensor(b),
            b.tensor(a),
            C::swap(a.forward(), b.forward()),
            move |pi| {
                let (l, r) = split_marginals::<C>(pi, fa.forward())?;
                Ok(C::swap(&fa.at(&l)?, &fb.at(&r)?))
            },
        )
        .expect("swap chart is well typed")
    }
}

/// The section `T`: `f` with fibres `f_π = i_π ⨟ f ⨟ r_{π⨟f}`.
pub fn section_t<C: SupportCategory>(f: &C::Morphism, tol: C::Scalar) -> Chart<C> {
    let dom = ChartObject::supports(C::dom(f).clone(), tol.clone());
    let cod = ChartObject::supports(C::cod(f).clone(), tol.clone());
    let base = f.clone();
    Chart::new(dom, cod, f.clone(), move |pi| restrict::<C>(&base, pi, &tol))
        .expect("section chart is well typed")
}

/// Comultiplication on `T(X)`: fibre `restrict(copy, π) ⨟ γ_{X,X}`.
pub fn chart_copy<C: SupportCategory>(x: &C::Object, tol: C::Scalar) -> Chart<C> {
    let tx = ChartObject::supports(x.clone(), tol.clone());
    let copy = C::copy(x);
    let x = x.clone();
    Chart::new(tx.clone(), tx.tensor(&tx), copy.clone(), move |pi| {
        let pushed = C::compose(pi, &copy)?;
        let gamma = oplax_gamma::<C>(&x, &x, &pushed, &tol)?;
        C::compose(&restrict::<C>(&copy, pi, &tol)?, &gamma)
    })
    .expect("copy chart is well typed")
}

/// Counit on `T(X)`: `T(delete_X)`.
pub fn chart_delete<C: SupportCategory>(x: &C::Object, tol: C::Scalar) -> Chart<C> {
    section_t::<C>(&C::delete(x), tol)
}
