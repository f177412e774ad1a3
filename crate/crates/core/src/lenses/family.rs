use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::markov::{require_state, split_marginals, MarkovCategory};
use crate::support::SupportCategory;

type Assign<C> = dyn Fn(&<C as MarkovCategory>::Morphism) -> Result<<C as MarkovCategory>::Object>
    + Send
    + Sync;

enum Kind<C: MarkovCategory> {
    Constant(C::Object),
    Dependent(Arc<Assign<C>>),
}

/// An assignment of an object to every state on `base`.
///
/// Dependent families memoise their values by state fingerprint; the cache
/// is shared between clones.
pub struct IndexedFamily<C: MarkovCategory> {
    base: C::Object,
    kind: Kind<C>,
    cache: Arc<RwLock<HashMap<Vec<u64>, C::Object>>>,
}

impl<C: MarkovCategory> Clone for IndexedFamily<C> {
    fn clone(&self) -> Self {
        let kind = match &self.kind {
            Kind::Constant(o) => Kind::Constant(o.clone()),
            Kind::Dependent(f) => Kind::Dependent(Arc::clone(f)),
        };
        Self {
            base: self.base.clone(),
            kind,
            cache: Arc::clone(&self.cache),
        }
    }
}

impl<C: MarkovCategory> fmt::Debug for IndexedFamily<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Constant(o) => write!(f, "Const[{:?}]({:?})", self.base, o),
            Kind::Dependent(_) => write!(f, "Family[{:?}]", self.base),
        }
    }
}

impl<C: MarkovCategory> IndexedFamily<C> {
    pub fn new(
        base: C::Object,
        assign: impl Fn(&C::Morphism) -> Result<C::Object> + Send + Sync + 'static,
    ) -> Self {
        Self {
            base,
            kind: Kind::Dependent(Arc::new(assign)),
            cache: Arc::default(),
        }
    }

    pub fn constant(base: C::Object, value: C::Object) -> Self {
        Self {
            base,
            kind: Kind::Constant(value),
            cache: Arc::default(),
        }
    }

    pub fn base(&self) -> &C::Object {
        &self.base
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant(_))
    }

    pub fn constant_value(&self) -> Option<&C::Object> {
        match &self.kind {
            Kind::Constant(o) => Some(o),
            Kind::Dependent(_) => None,
        }
    }

    pub fn eval(&self, pi: &C::Morphism) -> Result<C::Object> {
        require_state::<C>(pi)?;
        if C::cod(pi) != &self.base {
            return Err(Error::SignatureMismatch(format!(
                "family over {} evaluated at a state on {}",
                C::describe(&self.base),
                C::describe(C::cod(pi)),
            )));
        }
        let assign = match &self.kind {
            Kind::Constant(o) => return Ok(o.clone()),
            Kind::Dependent(f) => f,
        };
        let key = C::fingerprint(pi);
        if let Some(hit) = self.cache.read().expect("family cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let value = assign(pi)?;
        self.cache
            .write()
            .expect("family cache poisoned")
            .insert(key, value.clone());
        Ok(value)
    }

    /// `(A ⊗ B)(π) = A(π_L) ⊗ B(π_R)`.
    pub fn tensor(&self, other: &Self) -> Self {
        let base = C::tensor_objects(&self.base, &other.base);
        if let (Kind::Constant(a), Kind::Constant(b)) = (&self.kind, &other.kind) {
            return Self::constant(base, C::tensor_objects(a, b));
        }
        let (left, right) = (self.clone(), other.clone());
        Self::new(base, move |pi| {
            let (l, r) = split_marginals::<C>(pi, &left.base)?;
            Ok(C::tensor_objects(&left.eval(&l)?, &right.eval(&r)?))
        })
    }
}

impl<C: SupportCategory> IndexedFamily<C> {
    /// `π ↦ X_π`.
    pub fn supports(base: C::Object, tol: C::Scalar) -> Self {
        Self::new(base, move |pi| Ok(C::support(pi, &tol)?.carrier))
    }
}

/// A base object paired with a family over it.
pub struct ChartObject<C: MarkovCategory> {
    fibre: IndexedFamily<C>,
}

impl<C: MarkovCategory> Clone for ChartObject<C> {
    fn clone(&self) -> Self {
        Self {
            fibre: self.fibre.clone(),
        }
    }
}

impl<C: MarkovCategory> fmt::Debug for ChartObject<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{:?}, {:?}⟩", self.fibre.base(), self.fibre)
    }
}

impl<C: MarkovCategory> ChartObject<C> {
    pub fn new(fibre: IndexedFamily<C>) -> Self {
        Self { fibre }
    }

    pub fn constant(forward: C::Object, value: C::Object) -> Self {
        Self::new(IndexedFamily::constant(forward, value))
    }

    /// `⟨I, I⟩`.
    pub fn unit() -> Self {
        Self::constant(C::unit(), C::unit())
    }

    pub fn forward(&self) -> &C::Object {
        self.fibre.base()
    }

    pub fn fibre(&self) -> &IndexedFamily<C> {
        &self.fibre
    }

    pub fn at(&self, pi: &C::Morphism) -> Result<C::Object> {
        self.fibre.eval(pi)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::new(self.fibre.tensor(&other.fibre))
    }
}

impl<C: SupportCategory> ChartObject<C> {
    /// `⟨X, X_(−)⟩`, the image of `X` under both sections.
    pub fn supports(forward: C::Object, tol: C::Scalar) -> Self {
        Self::new(IndexedFamily::supports(forward, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finstoch::{FinObject, FinStoch, StochMap};

    type F = FinStoch<f64>;

    #[test]
    fn equal_states_yield_identical_objects() {
        let x = FinObject::indexed(3).unwrap();
        let fam = IndexedFamily::<F>::supports(x.clone(), 1e-12);
        let pi = StochMap::state(x.clone(), vec![0.5, 0.0, 0.5]).unwrap();
        let nearly = StochMap::state(x.clone(), vec![0.5 + 1e-15, 0.0, 0.5 - 1e-15]).unwrap();
        assert_eq!(fam.eval(&pi).unwrap(), fam.eval(&nearly).unwrap());
        assert_eq!(fam.eval(&pi).unwrap().size(), 2);
        let other = StochMap::state(FinObject::indexed(2).unwrap(), vec![0.5, 0.5]).unwrap();
        assert!(matches!(fam.eval(&other), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn tensor_family_uses_marginals() {
        let x = FinObject::indexed(2).unwrap();
        let fam = IndexedFamily::<F>::supports(x.clone(), 1e-12);
        let both = fam.tensor(&fam);
        // joint supported on the diagonal: both marginals are full
        let pi = StochMap::state(x.tensor(&x), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(both.eval(&pi).unwrap(), x.tensor(&x));
        let constant = IndexedFamily::<F>::constant(x.clone(), x.clone());
        assert!(constant.tensor(&constant).is_constant());
    }

    #[test]
    fn cache_is_safe_under_concurrent_use() {
        let x = FinObject::indexed(4).unwrap();
        let fam = IndexedFamily::<F>::supports(x.clone(), 1e-12);
        std::thread::scope(|s| {
            for t in 0..8 {
                let fam = fam.clone();
                let x = x.clone();
                s.spawn(move || {
                    let mut probs = vec![0.0; 4];
                    probs[t % 4] = 0.5;
                    probs[(t + 1) % 4] = 0.5;
                    let pi = StochMap::state(x, probs).unwrap();
                    for _ in 0..20 {
                        assert_eq!(fam.eval(&pi).unwrap().size(), 2);
                    }
                });
            }
        });
    }
}
