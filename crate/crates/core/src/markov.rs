//! The interface every concrete Markov category implements, plus the
//! operations that can be written once against it.
//!
//! Instances are strict monoidal: an object is a word of atomic factors,
//! `tensor_objects` concatenates words and the unit is the empty word. The
//! associator and unitors are therefore identities, and a product object
//! keeps its factorisation for [`marginals`].

use std::fmt::Debug;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tag identifying which concrete instance a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Instance {
    Finite,
    Gaussian,
}

impl Instance {
    pub fn name(self) -> &'static str {
        match self {
            Instance::Finite => "finite",
            Instance::Gaussian => "gaussian",
        }
    }
}

/// A symmetric monoidal category with a commutative comonoid on every object.
///
/// Implemented by zero-sized marker types; morphisms and objects are plain
/// immutable values.
pub trait MarkovCategory: Sized + Send + Sync + 'static {
    type Scalar: Clone + PartialOrd + Debug + Zero + Send + Sync + 'static;
    type Object: Clone + PartialEq + Debug + Send + Sync + 'static;
    type Morphism: Clone + Debug + Send + Sync + 'static;

    const INSTANCE: Instance;

    fn unit() -> Self::Object;
    fn tensor_objects(x: &Self::Object, y: &Self::Object) -> Self::Object;
    /// Given `obj = left ⊗ rest`, return `rest`.
    fn split_left(obj: &Self::Object, left: &Self::Object) -> Result<Self::Object>;

    fn dom(f: &Self::Morphism) -> &Self::Object;
    fn cod(f: &Self::Morphism) -> &Self::Object;

    fn identity(x: &Self::Object) -> Self::Morphism;
    fn compose(f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism>;
    fn tensor(f: &Self::Morphism, g: &Self::Morphism) -> Self::Morphism;
    fn copy(x: &Self::Object) -> Self::Morphism;
    fn delete(x: &Self::Object) -> Self::Morphism;
    fn swap(x: &Self::Object, y: &Self::Object) -> Self::Morphism;

    /// Sup-norm distance between the representations of two parallel morphisms.
    fn distance(f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Scalar>;

    /// Hashable key identifying a morphism up to quantisation.
    fn fingerprint(f: &Self::Morphism) -> Vec<u64>;

    fn describe(x: &Self::Object) -> String {
        format!("{x:?}")
    }
}

pub fn is_state<C: MarkovCategory>(pi: &C::Morphism) -> bool {
    C::dom(pi) == &C::unit()
}

pub(crate) fn require_state<C: MarkovCategory>(pi: &C::Morphism) -> Result<()> {
    if is_state::<C>(pi) {
        Ok(())
    } else {
        Err(Error::SignatureMismatch(format!(
            "expected a state out of the unit, found domain {}",
            C::describe(C::dom(pi))
        )))
    }
}

pub(crate) fn require_parallel<C: MarkovCategory>(
    f: &C::Morphism,
    g: &C::Morphism,
) -> Result<()> {
    if C::dom(f) != C::dom(g) || C::cod(f) != C::cod(g) {
        return Err(Error::SignatureMismatch(format!(
            "{} -> {} is not parallel to {} -> {}",
            C::describe(C::dom(f)),
            C::describe(C::cod(f)),
            C::describe(C::dom(g)),
            C::describe(C::cod(g)),
        )));
    }
    Ok(())
}

/// Compose a non-empty chain left to right.
pub fn compose_all<C: MarkovCategory>(chain: &[&C::Morphism]) -> Result<C::Morphism> {
    let (first, rest) = chain
        .split_first()
        .ok_or_else(|| Error::validation("composite", "empty chain"))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, g| C::compose(&acc, g))
}

/// Marginals `(π ⨟ (id ⊗ del), π ⨟ (del ⊗ id))` of a state on `left ⊗ right`.
pub fn marginals<C: MarkovCategory>(
    pi: &C::Morphism,
    left: &C::Object,
    right: &C::Object,
) -> Result<(C::Morphism, C::Morphism)> {
    require_state::<C>(pi)?;
    let target = C::cod(pi);
    if &C::tensor_objects(left, right) != target {
        return Err(Error::NotAProduct(C::describe(target)));
    }
    let keep_left = C::tensor(&C::identity(left), &C::delete(right));
    let keep_right = C::tensor(&C::delete(left), &C::identity(right));
    Ok((C::compose(pi, &keep_left)?, C::compose(pi, &keep_right)?))
}

/// Marginals of a state whose target is split after the factor `left`.
pub fn split_marginals<C: MarkovCategory>(
    pi: &C::Morphism,
    left: &C::Object,
) -> Result<(C::Morphism, C::Morphism)> {
    let right = C::split_left(C::cod(pi), left)?;
    marginals::<C>(pi, left, &right)
}

/// The joint state `π ⨟ copy ⨟ (id ⊗ f)`.
pub fn graph_state<C: MarkovCategory>(pi: &C::Morphism, f: &C::Morphism) -> Result<C::Morphism> {
    let x = C::cod(pi);
    let copied = C::compose(pi, &C::copy(x))?;
    C::compose(&copied, &C::tensor(&C::identity(x), f))
}

/// Distance between the joint states of `f` and `g` against `π`.
///
/// Zero exactly when `f` and `g` are π-almost surely equal.
pub fn as_equal_residual<C: MarkovCategory>(
    f: &C::Morphism,
    g: &C::Morphism,
    pi: &C::Morphism,
) -> Result<C::Scalar> {
    require_state::<C>(pi)?;
    require_parallel::<C>(f, g)?;
    if C::dom(f) != C::cod(pi) {
        return Err(Error::SignatureMismatch(format!(
            "morphisms out of {} tested against a state on {}",
            C::describe(C::dom(f)),
            C::describe(C::cod(pi)),
        )));
    }
    C::distance(&graph_state::<C>(pi, f)?, &graph_state::<C>(pi, g)?)
}

pub fn as_equal<C: MarkovCategory>(
    f: &C::Morphism,
    g: &C::Morphism,
    pi: &C::Morphism,
    tol: &C::Scalar,
) -> Result<bool> {
    Ok(as_equal_residual::<C>(f, g, pi)? <= *tol)
}

/// Largest of a list of residuals.
pub(crate) fn max_scalar<S: Clone + PartialOrd + Zero>(values: impl IntoIterator<Item = S>) -> S {
    values
        .into_iter()
        .fold(S::zero(), |acc, v| if v > acc { v } else { acc })
}
