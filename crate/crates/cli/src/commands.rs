use std::path::Path;

use bayeslens::dynamic::{AnyMorphism, AnyObject};
use bayeslens::laws::{run_law, CaseGen, Law};
use bayeslens::lenses::{filter_step, PointObservation};
use bayeslens::{FinObject, FinStoch, Gauss, GaussObject, InversionContext};
use nalgebra::DVector;
use serde_json::{json, Value};

use crate::emit::{float, Fragment};
use crate::error::CliError;
use crate::model::Model;

/// Moves values of one instance in and out of the runtime-tagged types.
trait Dyn: PointObservation<Scalar = f64> {
    fn wrap(m: Self::Morphism) -> AnyMorphism;
    fn wrap_object(x: Self::Object) -> AnyObject;
    fn unwrap(m: &AnyMorphism) -> bayeslens::Result<&Self::Morphism>;
    fn point(obj: &Self::Object, v: &Value) -> Result<Self::Point, String>;
    /// Base index of each carrier point, when supports are subsets.
    fn carrier_indices(section: &Self::Morphism) -> Option<Vec<usize>>;
}

impl Dyn for FinStoch<f64> {
    fn wrap(m: Self::Morphism) -> AnyMorphism {
        AnyMorphism::Finite(m)
    }

    fn wrap_object(x: FinObject) -> AnyObject {
        AnyObject::Finite(x)
    }

    fn unwrap(m: &AnyMorphism) -> bayeslens::Result<&Self::Morphism> {
        m.as_finite()
    }

    fn point(obj: &FinObject, v: &Value) -> Result<usize, String> {
        let label = v
            .as_str()
            .ok_or_else(|| format!("expected a label, found {v}"))?;
        obj.index_of(label)
            .ok_or_else(|| format!("unknown label `{label}`"))
    }

    fn carrier_indices(section: &Self::Morphism) -> Option<Vec<usize>> {
        Some(
            (0..section.n_rows())
                .map(|j| {
                    section
                        .row(j)
                        .iter()
                        .position(|&v| v == 1.0)
                        .expect("sections are deterministic")
                })
                .collect(),
        )
    }
}

impl Dyn for Gauss<f64> {
    fn wrap(m: Self::Morphism) -> AnyMorphism {
        AnyMorphism::Gaussian(m)
    }

    fn wrap_object(x: GaussObject) -> AnyObject {
        AnyObject::Gaussian(x)
    }

    fn unwrap(m: &AnyMorphism) -> bayeslens::Result<&Self::Morphism> {
        m.as_gaussian()
    }

    fn point(obj: &GaussObject, v: &Value) -> Result<DVector<f64>, String> {
        let values: Vec<f64> = match v {
            Value::Number(n) => vec![n.as_f64().expect("JSON numbers are finite")],
            Value::Array(items) => items
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| format!("expected a number, found {x}")))
                .collect::<Result<_, _>>()?,
            other => return Err(format!("expected a vector, found {other}")),
        };
        if values.len() != obj.dim() {
            return Err(format!(
                "observation has length {}, expected {}",
                values.len(),
                obj.dim()
            ));
        }
        Ok(DVector::from_vec(values))
    }

    fn carrier_indices(_: &Self::Morphism) -> Option<Vec<usize>> {
        None
    }
}

pub fn push(model: &Model, state: &str, morphism: &str) -> Result<Value, CliError> {
    let out = model.state(state)?.compose(model.morphism(morphism)?)?;
    let mut frag = Fragment::new(model);
    frag.state_auto(&format!("{state}.{morphism}"), &out);
    Ok(frag.finish())
}

pub fn invert(
    model: &Model,
    state: &str,
    morphism: &str,
    supported: bool,
    tol: f64,
) -> Result<Value, CliError> {
    let pi = model.state(state)?;
    let f = model.morphism(morphism)?;
    let names = Names { state, morphism };
    match pi {
        AnyMorphism::Finite(_) => invert_in::<FinStoch<f64>>(model, names, pi, f, supported, tol),
        AnyMorphism::Gaussian(_) => invert_in::<Gauss<f64>>(model, names, pi, f, supported, tol),
    }
}

#[derive(Clone, Copy)]
struct Names<'a> {
    state: &'a str,
    morphism: &'a str,
}

fn invert_in<C: Dyn>(
    model: &Model,
    names: Names,
    pi: &AnyMorphism,
    f: &AnyMorphism,
    supported: bool,
    tol: f64,
) -> Result<Value, CliError> {
    let (pi, f) = (C::unwrap(pi)?, C::unwrap(f)?);
    let ctx = InversionContext::<C>::new(f, pi, &tol)?;
    let mut frag = Fragment::new(model);
    let Names { state, morphism } = names;
    if !supported {
        let inverse = ctx.ordinary_inverse(&tol)?;
        frag.morphism_auto(&format!("{morphism}.inv"), &C::wrap(inverse));
        return Ok(frag.finish());
    }
    let sharp = ctx.supported_inverse(&tol)?;
    let x = C::wrap_object(C::dom(f).clone());
    let y = C::wrap_object(C::cod(f).clone());
    let x_ref = frag.object_ref(&x, &format!("{morphism}.dom"));
    let y_ref = frag.object_ref(&y, &format!("{morphism}.cod"));
    let x_supp = frag.carrier_ref(
        &C::wrap_object(ctx.prior.carrier.clone()),
        &x,
        &format!("{state}.supp"),
    );
    let pushed = format!("{state}.{morphism}");
    let y_supp = frag.carrier_ref(
        &C::wrap_object(ctx.pushforward.carrier.clone()),
        &y,
        &format!("{pushed}.supp"),
    );
    frag.morphism(&format!("{morphism}.sharp"), &C::wrap(sharp), y_supp.clone(), x_supp.clone());
    for (prefix, supp, carrier, base) in [
        (state, &ctx.prior, x_supp, x_ref),
        (pushed.as_str(), &ctx.pushforward, y_supp, y_ref),
    ] {
        let section = C::wrap(supp.section.clone());
        let retraction = C::wrap(supp.retraction.clone());
        frag.morphism(&format!("{prefix}.section"), &section, carrier.clone(), base.clone());
        frag.morphism(&format!("{prefix}.retraction"), &retraction, base, carrier);
    }
    Ok(frag.finish())
}

pub fn support(model: &Model, state: &str, tol: f64) -> Result<Value, CliError> {
    match model.state(state)? {
        pi @ AnyMorphism::Finite(_) => support_in::<FinStoch<f64>>(model, state, pi, tol),
        pi @ AnyMorphism::Gaussian(_) => support_in::<Gauss<f64>>(model, state, pi, tol),
    }
}

fn support_in<C: Dyn>(model: &Model, state: &str, pi: &AnyMorphism, tol: f64) -> Result<Value, CliError> {
    let s = C::support(C::unwrap(pi)?, &tol)?;
    let mut frag = Fragment::new(model);
    let base = C::wrap_object(s.base.clone());
    let base_ref = frag.object_ref(&base, &format!("{state}.object"));
    let carrier = frag.carrier_ref(&C::wrap_object(s.carrier.clone()), &base, &format!("{state}.supp"));
    let (section, retraction) = (format!("{state}.section"), format!("{state}.retraction"));
    frag.morphism(&section, &C::wrap(s.section.clone()), carrier.clone(), base_ref.clone());
    frag.morphism(&retraction, &C::wrap(s.retraction.clone()), base_ref, carrier.clone());
    let mut summary = json!({
        "state": state,
        "carrier": carrier,
        "section": section,
        "retraction": retraction,
        "rank": C::wrap(s.section.clone()).dom().size(),
    });
    if let Some(indices) = C::carrier_indices(&s.section) {
        summary["indices"] = json!(indices);
    }
    frag.extra("support", summary);
    Ok(frag.finish())
}

pub fn laws(gen: &CaseGen, names: &[String], tol: Option<f64>) -> Result<Value, CliError> {
    let names: Vec<String> = if names.is_empty() {
        Law::ALL.iter().map(|l| l.name().to_string()).collect()
    } else {
        names.to_vec()
    };
    let reports = names
        .iter()
        .map(|n| run_law(n, gen, tol))
        .collect::<bayeslens::Result<Vec<_>>>()?;
    let count = reports.iter().filter(|r| !r.passed).count();
    let value = serde_json::to_value(&reports).expect("reports serialise");
    if count > 0 {
        return Err(CliError::LawsFailed {
            count,
            reports: value,
        });
    }
    Ok(value)
}

pub fn filter(
    model: &Model,
    dynamics: &str,
    observe: &str,
    init: &str,
    obs_file: &Path,
    tol: f64,
) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(obs_file)
        .map_err(|e| CliError::Validation(format!("{}: {e}", obs_file.display())))?;
    let obs: Vec<Value> = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: expected a JSON array: {e}", obs_file.display())))?;
    let maps = [model.morphism(dynamics)?, model.morphism(observe)?];
    match model.state(init)? {
        b @ AnyMorphism::Finite(_) => filter_in::<FinStoch<f64>>(model, b, maps, &obs, tol),
        b @ AnyMorphism::Gaussian(_) => filter_in::<Gauss<f64>>(model, b, maps, &obs, tol),
    }
}

fn filter_in<C: Dyn>(
    model: &Model,
    init: &AnyMorphism,
    [dynamics, observe]: [&AnyMorphism; 2],
    obs: &[Value],
    tol: f64,
) -> Result<Value, CliError> {
    let mut belief = C::unwrap(init)?.clone();
    let (dynamics, observe) = (C::unwrap(dynamics)?, C::unwrap(observe)?);
    let mut frag = Fragment::new(model);
    let mut steps = Vec::with_capacity(obs.len());
    let mut log_likelihood = 0.0;
    for (k, v) in obs.iter().enumerate() {
        let point = C::point(C::cod(observe), v)
            .map_err(|e| CliError::Validation(format!("observation {k}: {e}")))?;
        let step = filter_step::<C>(&belief, dynamics, observe, &point, &tol)
            .map_err(|e| CliError::at_step(e, k))?;
        log_likelihood += step.log_predictive;
        belief = step.belief;
        let name = format!("belief.{k}");
        frag.state_auto(&name, &C::wrap(belief.clone()));
        steps.push(json!({
            "step": k,
            "state": name,
            "log_predictive": float(step.log_predictive),
        }));
    }
    frag.extra("steps", Value::Array(steps));
    frag.extra("log_likelihood", float(log_likelihood));
    Ok(frag.finish())
}
