//! One randomised case of each law, generic over the instance.

use rand_chacha::ChaCha8Rng;

use super::gen::{CaseGen, Sampler};
use super::Law;
use crate::error::Result;
use crate::lenses::{copy_inverse_iso, oplax_gamma, section_s, section_t, Chart, Lens};
use crate::markov::{
    as_equal, as_equal_residual, compose_all, graph_state, marginals, split_marginals,
    MarkovCategory,
};
use crate::support::{restrict, InversionContext};

pub(crate) struct Case<'a> {
    pub gen: &'a CaseGen,
    pub max_dim: usize,
    pub tol: f64,
    pub index: u64,
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| {
        let v = if v.is_nan() { f64::MAX } else { v };
        acc.max(v)
    })
}

fn dist<C: MarkovCategory<Scalar = f64>>(f: &C::Morphism, g: &C::Morphism) -> Result<f64> {
    C::distance(f, g)
}

fn chain<C: MarkovCategory>(parts: &[&C::Morphism]) -> Result<C::Morphism> {
    compose_all::<C>(parts)
}

struct Draw<'r, 'a> {
    rng: &'r mut ChaCha8Rng,
    case: &'r Case<'a>,
}

impl Draw<'_, '_> {
    fn object<C: Sampler>(&mut self) -> C::Object {
        C::random_object(self.rng, self.case.max_dim)
    }

    fn state<C: Sampler>(&mut self, x: &C::Object) -> C::Morphism {
        C::random_state(self.rng, x, self.case.gen.sparsity)
    }

    fn morphism<C: Sampler>(&mut self, x: &C::Object, y: &C::Object) -> C::Morphism {
        C::random_morphism(self.rng, x, y, self.case.gen.sparsity)
    }
}

pub(crate) fn run_case<C: Sampler>(law: Law, rng: &mut ChaCha8Rng, case: &Case<'_>) -> Result<f64> {
    let mut draw = Draw { rng, case };
    let d = &mut draw;
    match law {
        Law::Comonoid => comonoid::<C>(d),
        Law::BayesJoint => bayes_joint::<C>(d),
        Law::InverseUniqueness => inverse_uniqueness::<C>(d),
        Law::BijectionPsi => bijection_psi::<C>(d),
        Law::SupportRepresentability => support_representability::<C>(d),
        Law::SectionRetraction => section_retraction::<C>(d),
        Law::RestrictFunctorial => restrict_functorial::<C>(d),
        Law::SFunctorial => s_functorial::<C>(d),
        Law::TFunctorial => t_functorial::<C>(d),
        Law::GammaNatural => gamma_natural::<C>(d),
        Law::GammaAssoc => gamma_assoc::<C>(d),
        Law::GammaUnitor => gamma_unitor::<C>(d),
        Law::CopyInverse => copy_inverse::<C>(d),
        Law::MarginalNatural => marginal_natural::<C>(d),
        Law::LensAssoc => lens_assoc::<C>(d),
        Law::AsEqualBaseChangeForward => as_equal_base_change::<C>(d),
    }
}

fn comonoid<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y) = (d.object::<C>(), d.object::<C>());
    let id = C::identity(&x);
    let copy = C::copy(&x);
    let del = C::delete(&x);
    let xy = C::tensor_objects(&x, &y);
    let f = C::random_deterministic(d.rng, &x, &y);
    let shuffle = C::tensor(
        &C::tensor(&id, &C::swap(&x, &y)),
        &C::identity(&y),
    );
    let copy_xy = chain::<C>(&[&C::tensor(&copy, &C::copy(&y)), &shuffle])?;
    Ok(worst([
        dist::<C>(
            &C::compose(&copy, &C::tensor(&copy, &id))?,
            &C::compose(&copy, &C::tensor(&id, &copy))?,
        )?,
        dist::<C>(&C::compose(&copy, &C::tensor(&del, &id))?, &id)?,
        dist::<C>(&C::compose(&copy, &C::tensor(&id, &del))?, &id)?,
        dist::<C>(&C::compose(&copy, &C::swap(&x, &x))?, &copy)?,
        dist::<C>(
            &C::compose(&C::swap(&x, &y), &C::swap(&y, &x))?,
            &C::identity(&xy),
        )?,
        dist::<C>(&copy_xy, &C::copy(&xy))?,
        dist::<C>(
            &C::tensor(&del, &C::delete(&y)),
            &C::delete(&xy),
        )?,
        dist::<C>(&C::compose(&f, &C::delete(&y))?, &del)?,
        dist::<C>(
            &C::compose(&f, &C::copy(&y))?,
            &C::compose(&copy, &C::tensor(&f, &f))?,
        )?,
    ]))
}

fn bayes_joint<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y) = (d.object::<C>(), d.object::<C>());
    let pi = d.state::<C>(&x);
    let f = d.morphism::<C>(&x, &y);
    let h = C::harness_invert(&f, &pi, d.case.gen.mutation)?;
    let q = C::compose(&pi, &f)?;
    let lhs = graph_state::<C>(&pi, &f)?;
    let rhs = C::compose(&graph_state::<C>(&q, &h)?, &C::swap(&y, &x))?;
    Ok(worst([dist::<C>(&lhs, &rhs)?, C::inverse_defect(&h)]))
}

fn inverse_uniqueness<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y) = (d.object::<C>(), d.object::<C>());
    let pi = d.state::<C>(&x);
    let f = d.morphism::<C>(&x, &y);
    let ctx = InversionContext::<C>::new(&f, &pi, &C::default_tol())?;
    let h = ctx.ordinary_inverse(&C::default_tol())?;
    let other = C::perturb_off_support(d.rng, &h, &ctx.pushforward);
    let joint = C::compose(&graph_state::<C>(ctx.pushforward_state(), &other)?, &C::swap(&y, &x))?;
    Ok(worst([
        dist::<C>(&ctx.to_supported(&h)?, &ctx.to_supported(&other)?)?,
        dist::<C>(&joint, &graph_state::<C>(&pi, &f)?)?,
    ]))
}

fn bijection_psi<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y) = (d.object::<C>(), d.object::<C>());
    let pi = d.state::<C>(&x);
    let f = d.morphism::<C>(&x, &y);
    let tol = C::default_tol();
    let ctx = InversionContext::<C>::new(&f, &pi, &tol)?;
    let g = ctx.supported_inverse(&tol)?;
    let h = C::perturb_off_support(d.rng, &ctx.ordinary_inverse(&tol)?, &ctx.pushforward);
    let back = ctx.to_ordinary(&g)?;
    let joint = C::compose(&graph_state::<C>(ctx.pushforward_state(), &back)?, &C::swap(&y, &x))?;
    Ok(worst([
        dist::<C>(&ctx.to_supported(&back)?, &g)?,
        as_equal_residual::<C>(&ctx.to_ordinary(&ctx.to_supported(&h)?)?, &h, ctx.pushforward_state())?,
        dist::<C>(&joint, &graph_state::<C>(&pi, &f)?)?,
    ]))
}

fn support_representability<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y) = (d.object::<C>(), d.object::<C>());
    let pi = d.state::<C>(&x);
    let f = d.morphism::<C>(&x, &y);
    let support = C::support(&pi, &C::default_tol())?;
    let g = if d.case.index % 2 == 0 {
        C::perturb_off_support(d.rng, &f, &support)
    } else {
        d.morphism::<C>(&x, &y)
    };
    let tol = d.case.tol;
    let diagrammatic = as_equal::<C>(&f, &g, &pi, &tol)?;
    let on_support = dist::<C>(
        &C::compose(&support.section, &f)?,
        &C::compose(&support.section, &g)?,
    )? <= tol;
    let disagreement = if diagrammatic == on_support { 0.0 } else { 1.0 };
    let retract = dist::<C>(
        &C::compose(&support.section, &support.retraction)?,
        &C::identity(&support.carrier),
    )?;
    Ok(worst([disagreement, retract]))
}

fn section_retraction<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let x = d.object::<C>();
    let pi = d.state::<C>(&x);
    let s = C::support(&pi, &C::default_tol())?;
    let round_trip = C::compose(&s.retraction, &s.section)?;
    Ok(worst([
        dist::<C>(
            &C::compose(&s.section, &s.retraction)?,
            &C::identity(&s.carrier),
        )?,
        as_equal_residual::<C>(&round_trip, &C::identity(&x), &pi)?,
    ]))
}

fn restrict_functorial<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y, z) = (d.object::<C>(), d.object::<C>(), d.object::<C>());
    let pi = d.state::<C>(&x);
    let f = d.morphism::<C>(&x, &y);
    let g = d.morphism::<C>(&y, &z);
    let tol = C::default_tol();
    let q = C::compose(&pi, &f)?;
    let split = C::compose(&restrict::<C>(&f, &pi, &tol)?, &restrict::<C>(&g, &q, &tol)?)?;
    let whole = restrict::<C>(&C::compose(&f, &g)?, &pi, &tol)?;
    let s = C::support(&pi, &tol)?;
    Ok(worst([
        dist::<C>(&split, &whole)?,
        dist::<C>(&restrict::<C>(&C::identity(&x), &pi, &tol)?, &C::identity(&s.carrier))?,
    ]))
}

fn s_functorial<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y, z) = (d.object::<C>(), d.object::<C>(), d.object::<C>());
    let f = d.morphism::<C>(&x, &y);
    let g = d.morphism::<C>(&y, &z);
    let tol = C::default_tol();
    let (sf, sg) = (section_s::<C>(&f, tol), section_s::<C>(&g, tol));
    let composite = sf.compose(&sg)?;
    let whole = section_s::<C>(&C::compose(&f, &g)?, tol);
    let id = section_s::<C>(&C::identity(&x), tol);
    let unit = Lens::identity(sf.dom());
    let mut residuals = vec![dist::<C>(composite.forward(), whole.forward())?];
    for _ in 0..d.case.gen.priors_per_case {
        let pi = d.state::<C>(&x);
        residuals.push(dist::<C>(&composite.backward_at(&pi)?, &whole.backward_at(&pi)?)?);
        residuals.push(dist::<C>(&id.backward_at(&pi)?, &unit.backward_at(&pi)?)?);
    }
    Ok(worst(residuals))
}

fn t_functorial<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y, z) = (d.object::<C>(), d.object::<C>(), d.object::<C>());
    let f = d.morphism::<C>(&x, &y);
    let g = d.morphism::<C>(&y, &z);
    let tol = C::default_tol();
    let composite = section_t::<C>(&f, tol).compose(&section_t::<C>(&g, tol))?;
    let whole = section_t::<C>(&C::compose(&f, &g)?, tol);
    let id = section_t::<C>(&C::identity(&x), tol);
    let unit = Chart::identity(id.dom());
    let mut residuals = vec![dist::<C>(composite.base(), whole.base())?];
    for _ in 0..d.case.gen.priors_per_case {
        let pi = d.state::<C>(&x);
        residuals.push(dist::<C>(&composite.fibre_at(&pi)?, &whole.fibre_at(&pi)?)?);
        residuals.push(dist::<C>(&id.fibre_at(&pi)?, &unit.fibre_at(&pi)?)?);
    }
    Ok(worst(residuals))
}

fn gamma_natural<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y) = (d.object::<C>(), d.object::<C>());
    let (x2, y2) = (d.object::<C>(), d.object::<C>());
    let f = d.morphism::<C>(&x, &x2);
    let g = d.morphism::<C>(&y, &y2);
    let tol = C::default_tol();
    let fg = C::tensor(&f, &g);
    let pair = section_t::<C>(&f, tol).tensor(&section_t::<C>(&g, tol));
    let whole = section_t::<C>(&fg, tol);
    let mut residuals = Vec::new();
    for _ in 0..d.case.gen.priors_per_case.clamp(1, 10) {
        let pi = d.state::<C>(&C::tensor_objects(&x, &y));
        let pushed = C::compose(&pi, &fg)?;
        let lhs = C::compose(&oplax_gamma::<C>(&x, &y, &pi, &tol)?, &pair.fibre_at(&pi)?)?;
        let rhs = C::compose(&whole.fibre_at(&pi)?, &oplax_gamma::<C>(&x2, &y2, &pushed, &tol)?)?;
        residuals.push(dist::<C>(&lhs, &rhs)?);
    }
    Ok(worst(residuals))
}

fn gamma_assoc<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y, z) = (d.object::<C>(), d.object::<C>(), d.object::<C>());
    let tol = C::default_tol();
    let xy = C::tensor_objects(&x, &y);
    let yz = C::tensor_objects(&y, &z);
    let pi = d.state::<C>(&C::tensor_objects(&xy, &z));
    let (pi_xy, pi_z) = marginals::<C>(&pi, &xy, &z)?;
    let (_, pi_yz) = marginals::<C>(&pi, &x, &yz)?;
    let (pi_x, _) = marginals::<C>(&pi_xy, &x, &y)?;
    let carrier = |s: &C::Morphism| -> Result<C::Object> { Ok(C::support(s, &tol)?.carrier) };
    let left = C::compose(
        &oplax_gamma::<C>(&xy, &z, &pi, &tol)?,
        &C::tensor(
            &oplax_gamma::<C>(&x, &y, &pi_xy, &tol)?,
            &C::identity(&carrier(&pi_z)?),
        ),
    )?;
    let joint = C::support(&pi, &tol)?;
    let right = chain::<C>(&[
        &joint.section,
        &joint.retraction,
        &oplax_gamma::<C>(&x, &yz, &pi, &tol)?,
        &C::tensor(
            &C::identity(&carrier(&pi_x)?),
            &oplax_gamma::<C>(&y, &z, &pi_yz, &tol)?,
        ),
    ])?;
    dist::<C>(&left, &right)
}

fn gamma_unitor<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let x = d.object::<C>();
    let tol = C::default_tol();
    let pi = d.state::<C>(&x);
    let unit = C::unit();
    let s = C::support(&pi, &tol)?;
    let expected = C::compose(&s.section, &s.retraction)?;
    Ok(worst([
        dist::<C>(&oplax_gamma::<C>(&unit, &x, &pi, &tol)?, &expected)?,
        dist::<C>(&oplax_gamma::<C>(&x, &unit, &pi, &tol)?, &expected)?,
    ]))
}

fn copy_inverse<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let x = d.object::<C>();
    let tol = C::default_tol();
    let pi = match d.case.index % 5 {
        0 => C::special_state(d.rng, &x, 0),
        1 => C::special_state(d.rng, &x, 1),
        _ => d.state::<C>(&x),
    };
    let iso = copy_inverse_iso::<C>(&pi, &tol)?;
    let copied = C::compose(&pi, &C::copy(&x))?;
    let (sx, sxx) = (C::support(&pi, &tol)?, C::support(&copied, &tol)?);
    let marginal = C::tensor(&C::identity(&x), &C::delete(&x));
    Ok(worst([
        dist::<C>(
            &C::compose(&iso.marginal_sharp, &iso.copy_sharp)?,
            &C::identity(&sx.carrier),
        )?,
        dist::<C>(
            &C::compose(&iso.copy_sharp, &iso.marginal_sharp)?,
            &C::identity(&sxx.carrier),
        )?,
        as_equal_residual::<C>(
            &C::compose(&marginal, &C::copy(&x))?,
            &C::identity(&C::tensor_objects(&x, &x)),
            &copied,
        )?,
    ]))
}

fn marginal_natural<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y, z) = (d.object::<C>(), d.object::<C>(), d.object::<C>());
    let (x2, y2) = (d.object::<C>(), d.object::<C>());
    let f = d.morphism::<C>(&x, &x2);
    let g = d.morphism::<C>(&y, &y2);
    let pi = d.state::<C>(&C::tensor_objects(&x, &y));
    let (l, r) = marginals::<C>(&pi, &x, &y)?;
    let (l2, r2) = marginals::<C>(&C::compose(&pi, &C::tensor(&f, &g))?, &x2, &y2)?;
    let xy = C::tensor_objects(&x, &y);
    let rho = d.state::<C>(&C::tensor_objects(&xy, &z));
    let (rho_x, rho_yz) = split_marginals::<C>(&rho, &x)?;
    let (rho_xy, rho_z) = marginals::<C>(&rho, &xy, &z)?;
    let (rho_xy_x, rho_xy_y) = marginals::<C>(&rho_xy, &x, &y)?;
    let (rho_yz_y, rho_yz_z) = marginals::<C>(&rho_yz, &y, &z)?;
    let unit = C::unit();
    let (_, lambda) = marginals::<C>(&l, &unit, &x)?;
    let (rho_unit, _) = marginals::<C>(&l, &x, &unit)?;
    Ok(worst([
        dist::<C>(&l2, &C::compose(&l, &f)?)?,
        dist::<C>(&r2, &C::compose(&r, &g)?)?,
        dist::<C>(&rho_x, &rho_xy_x)?,
        dist::<C>(&rho_xy_y, &rho_yz_y)?,
        dist::<C>(&rho_z, &rho_yz_z)?,
        dist::<C>(&lambda, &l)?,
        dist::<C>(&rho_unit, &l)?,
    ]))
}

fn lens_assoc<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let objects: Vec<C::Object> = (0..4).map(|_| d.object::<C>()).collect();
    let maps: Vec<C::Morphism> = objects
        .windows(2)
        .map(|w| d.morphism::<C>(&w[0], &w[1]))
        .collect();
    let tol = C::default_tol();
    let lenses: Vec<Lens<C>> = maps.iter().map(|m| section_s::<C>(m, tol)).collect();
    let left = lenses[0].compose(&lenses[1])?.compose(&lenses[2])?;
    let right = lenses[0].compose(&lenses[1].compose(&lenses[2])?)?;
    let unital = Lens::identity(lenses[0].dom()).compose(&lenses[0])?;
    let mut residuals = vec![dist::<C>(left.forward(), right.forward())?];
    for _ in 0..d.case.gen.priors_per_case.clamp(1, 10) {
        let pi = d.state::<C>(&objects[0]);
        residuals.push(dist::<C>(&left.backward_at(&pi)?, &right.backward_at(&pi)?)?);
        residuals.push(dist::<C>(&unital.backward_at(&pi)?, &lenses[0].backward_at(&pi)?)?);
    }
    Ok(worst(residuals))
}

fn as_equal_base_change<C: Sampler>(d: &mut Draw) -> Result<f64> {
    let (x, y, z) = (d.object::<C>(), d.object::<C>(), d.object::<C>());
    let pi = d.state::<C>(&x);
    let f = d.morphism::<C>(&x, &y);
    let u = d.morphism::<C>(&y, &z);
    let q = C::compose(&pi, &f)?;
    let v = C::perturb_off_support(d.rng, &u, &C::support(&q, &C::default_tol())?);
    Ok(worst([
        as_equal_residual::<C>(&u, &v, &q)?,
        as_equal_residual::<C>(&C::compose(&f, &u)?, &C::compose(&f, &v)?, &pi)?,
    ]))
}
