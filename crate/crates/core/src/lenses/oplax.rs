use crate::error::Result;
use crate::markov::{marginals, MarkovCategory};
use crate::support::{bayes_invert_supported, SupportCategory};

/// `γ_{X,Y} = i_π ⨟ (r_{π_L} ⊗ r_{π_R}) : (X ⊗ Y)_π → X_{π_L} ⊗ Y_{π_R}`.
pub fn oplax_gamma<C: SupportCategory>(
    x: &C::Object,
    y: &C::Object,
    pi: &C::Morphism,
    tol: &C::Scalar,
) -> Result<C::Morphism> {
    let (l, r) = marginals::<C>(pi, x, y)?;
    let joint = C::support(pi, tol)?;
    let (left, right) = (C::support(&l, tol)?, C::support(&r, tol)?);
    C::compose(
        &joint.section,
        &C::tensor(&left.retraction, &right.retraction),
    )
}

/// The mutually inverse pair `C♯_π : (X ⊗ X)_{π⨟C} → X_π` and
/// `L♯_{π⨟C} : X_π → (X ⊗ X)_{π⨟C}` for `C = copy` and `L = id ⊗ delete`.
#[derive(Debug, Clone)]
pub struct CopyInverse<C: MarkovCategory> {
    pub copy_sharp: C::Morphism,
    pub marginal_sharp: C::Morphism,
}

pub fn copy_inverse_iso<C: SupportCategory>(
    pi: &C::Morphism,
    tol: &C::Scalar,
) -> Result<CopyInverse<C>> {
    let x = C::cod(pi);
    let copy = C::copy(x);
    let left = C::tensor(&C::identity(x), &C::delete(x));
    let copied = C::compose(pi, &copy)?;
    Ok(CopyInverse {
        copy_sharp: bayes_invert_supported::<C>(&copy, pi, tol)?,
        marginal_sharp: bayes_invert_supported::<C>(&left, &copied, tol)?,
    })
}
