//! Dependent Bayesian charts and lenses.
//!
//! An object is a base object `X` with a family `A` assigning an object to
//! every state on `X`. A chart `⟨X, A⟩ → ⟨Y, B⟩` carries `f: X → Y` and, for
//! each prior `π`, a forward fibre map `A(π) → B(π ⨟ f)`; a lens carries a
//! backward map `B(π ⨟ f) → A(π)` instead. Families are intensional, so every
//! fibre is built and signature-checked on demand at a given prior.

mod chart;
mod family;
mod filter;
mod lens;
mod oplax;

pub use chart::{chart_copy, chart_delete, section_t, Chart};
pub use family::{ChartObject, IndexedFamily};
pub use filter::{filter_step, FilterStep, PointObservation};
pub use lens::{section_s, stat_lens, Lens};
pub use oplax::{copy_inverse_iso, oplax_gamma, CopyInverse};

use crate::error::{Error, Result};
use crate::markov::MarkovCategory;

pub(crate) fn check_fibre<C: MarkovCategory>(
    what: &str,
    m: &C::Morphism,
    dom: &C::Object,
    cod: &C::Object,
) -> Result<()> {
    if C::dom(m) != dom || C::cod(m) != cod {
        return Err(Error::SignatureMismatch(format!(
            "{what}: expected {} -> {}, found {} -> {}",
            C::describe(dom),
            C::describe(cod),
            C::describe(C::dom(m)),
            C::describe(C::cod(m)),
        )));
    }
    Ok(())
}

pub(crate) fn check_base<C: MarkovCategory>(
    f: &C::Morphism,
    dom: &C::Object,
    cod: &C::Object,
) -> Result<()> {
    check_fibre::<C>("base morphism", f, dom, cod)
}
