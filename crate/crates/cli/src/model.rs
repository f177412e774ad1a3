//! JSON model files: named objects, morphisms and states of either instance.
//!
//! ```json
//! {
//!   "objects":   { "X": ["a", "b"], "R": { "dim": 1 } },
//!   "morphisms": { "f": { "dom": "X", "cod": "X", "rows": [[0.8, 0.2], [0.4, 0.6]] },
//!                  "g": { "dom": "R", "cod": "R", "A": [[1]], "b": [0], "Sigma": [[1]] } },
//!   "states":    { "pi": { "object": "X", "probs": [0.25, 0.75] },
//!                  "n":  { "object": "R", "mean": [0], "cov": [[1]] } }
//! }
//! ```
//!
//! `dom`, `cod` and `object` name one object or a list of objects (their
//! tensor product; `[]` is the unit). Unknown top-level keys are ignored.

use std::path::Path;

use bayeslens::dynamic::{AnyMorphism, AnyObject};
use bayeslens::{FinObject, GaussMap, GaussObject, Instance, StochMap};
use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub objects: IndexMap<String, AnyObject>,
    pub morphisms: IndexMap<String, AnyMorphism>,
    pub states: IndexMap<String, AnyMorphism>,
}

#[derive(Deserialize)]
struct RawModel {
    #[serde(default)]
    objects: IndexMap<String, Value>,
    #[serde(default)]
    morphisms: IndexMap<String, Value>,
    #[serde(default)]
    states: IndexMap<String, Value>,
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {msg}"))
}

impl Model {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawModel = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("model file: {e}")))?;
        let mut model = Model::default();
        for (name, v) in &raw.objects {
            let obj = parse_object(&format!("objects.{name}"), v)?;
            model.objects.insert(name.clone(), obj);
        }
        for (name, v) in &raw.morphisms {
            let m = model.parse_morphism(&format!("morphisms.{name}"), v)?;
            model.morphisms.insert(name.clone(), m);
        }
        for (name, v) in &raw.states {
            let s = model.parse_state(&format!("states.{name}"), v)?;
            model.states.insert(name.clone(), s);
        }
        Ok(model)
    }

    pub fn morphism(&self, name: &str) -> Result<&AnyMorphism, CliError> {
        self.morphisms
            .get(name)
            .ok_or_else(|| CliError::Validation(format!("unknown morphism `{name}`")))
    }

    pub fn state(&self, name: &str) -> Result<&AnyMorphism, CliError> {
        self.states
            .get(name)
            .ok_or_else(|| CliError::Validation(format!("unknown state `{name}`")))
    }

    fn resolve(&self, path: &str, v: Option<&Value>, instance: Instance) -> Result<AnyObject, CliError> {
        let names: Vec<&str> = match v {
            Some(Value::String(s)) => vec![s.as_str()],
            Some(Value::Array(items)) => items
                .iter()
                .map(|i| i.as_str().ok_or_else(|| invalid(path, "object names must be strings")))
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(invalid(path, "expected an object name or a list of names")),
            None => return Err(invalid(path, "missing")),
        };
        let mut acc = match instance {
            Instance::Finite => AnyObject::Finite(FinObject::unit()),
            Instance::Gaussian => AnyObject::Gaussian(GaussObject::unit()),
        };
        for name in names {
            let obj = self
                .objects
                .get(name)
                .ok_or_else(|| invalid(path, format!("unknown object `{name}`")))?;
            acc = match (acc, obj) {
                (AnyObject::Finite(a), AnyObject::Finite(b)) => AnyObject::Finite(a.tensor(b)),
                (AnyObject::Gaussian(a), AnyObject::Gaussian(b)) => AnyObject::Gaussian(a.tensor(b)),
                _ => {
                    return Err(invalid(
                        path,
                        format!("object `{name}` is not a {} object", instance.name()),
                    ))
                }
            };
        }
        Ok(acc)
    }

    fn parse_morphism(&self, path: &str, v: &Value) -> Result<AnyMorphism, CliError> {
        let obj = v.as_object().ok_or_else(|| invalid(path, "expected an object"))?;
        if obj.contains_key("rows") {
            let dom = finite(self.resolve(&format!("{path}.dom"), obj.get("dom"), Instance::Finite)?);
            let cod = finite(self.resolve(&format!("{path}.cod"), obj.get("cod"), Instance::Finite)?);
            let rows = matrix(&format!("{path}.rows"), &obj["rows"], dom.size(), cod.size())?;
            let rows = (0..rows.nrows())
                .map(|i| rows.row(i).iter().copied().collect())
                .collect();
            let map = StochMap::from_rows(dom, cod, rows).map_err(|e| invalid(path, e))?;
            Ok(AnyMorphism::Finite(map))
        } else if obj.contains_key("A") {
            let dom = gaussian(self.resolve(&format!("{path}.dom"), obj.get("dom"), Instance::Gaussian)?);
            let cod = gaussian(self.resolve(&format!("{path}.cod"), obj.get("cod"), Instance::Gaussian)?);
            let (m, n) = (dom.dim(), cod.dim());
            let a = matrix(&format!("{path}.A"), &obj["A"], n, m)?;
            let b = vector(&format!("{path}.b"), obj.get("b"), n)?;
            let sigma = matrix(&format!("{path}.Sigma"), field(path, obj.get("Sigma"), "Sigma")?, n, n)?;
            let map = GaussMap::new(dom, cod, a, b, sigma).map_err(|e| invalid(path, e))?;
            Ok(AnyMorphism::Gaussian(map))
        } else {
            Err(invalid(path, "expected `rows` (finite) or `A`, `b`, `Sigma` (gaussian)"))
        }
    }

    fn parse_state(&self, path: &str, v: &Value) -> Result<AnyMorphism, CliError> {
        let obj = v.as_object().ok_or_else(|| invalid(path, "expected an object"))?;
        if obj.contains_key("probs") {
            let cod = finite(self.resolve(&format!("{path}.object"), obj.get("object"), Instance::Finite)?);
            let probs = vector(&format!("{path}.probs"), obj.get("probs"), cod.size())?;
            let map = StochMap::state(cod, probs.iter().copied().collect()).map_err(|e| invalid(path, e))?;
            Ok(AnyMorphism::Finite(map))
        } else if obj.contains_key("mean") {
            let cod = gaussian(self.resolve(&format!("{path}.object"), obj.get("object"), Instance::Gaussian)?);
            let n = cod.dim();
            let mean = vector(&format!("{path}.mean"), obj.get("mean"), n)?;
            let cov = matrix(&format!("{path}.cov"), field(path, obj.get("cov"), "cov")?, n, n)?;
            let map = GaussMap::state_on(cod, mean, cov).map_err(|e| invalid(path, e))?;
            Ok(AnyMorphism::Gaussian(map))
        } else {
            Err(invalid(path, "expected `probs` (finite) or `mean`, `cov` (gaussian)"))
        }
    }
}

fn finite(obj: AnyObject) -> FinObject {
    match obj {
        AnyObject::Finite(x) => x,
        AnyObject::Gaussian(_) => unreachable!("resolved with the finite instance"),
    }
}

fn gaussian(obj: AnyObject) -> GaussObject {
    match obj {
        AnyObject::Gaussian(x) => x,
        AnyObject::Finite(_) => unreachable!("resolved with the gaussian instance"),
    }
}

fn field<'a>(path: &str, v: Option<&'a Value>, name: &str) -> Result<&'a Value, CliError> {
    v.ok_or_else(|| invalid(path, format!("missing `{name}`")))
}

fn parse_object(path: &str, v: &Value) -> Result<AnyObject, CliError> {
    match v {
        Value::Array(items) => {
            let labels: Vec<String> = items
                .iter()
                .enumerate()
                .map(|(i, l)| match l {
                    Value::String(s) => Ok(s.clone()),
                    _ => Err(invalid(&format!("{path}[{i}]"), "labels must be strings")),
                })
                .collect::<Result<_, _>>()?;
            let obj = FinObject::new(labels).map_err(|e| invalid(path, e))?;
            Ok(AnyObject::Finite(obj))
        }
        Value::Object(map) => {
            let dim = map
                .get("dim")
                .and_then(Value::as_u64)
                .ok_or_else(|| invalid(path, "expected {\"dim\": n}"))?;
            if dim == 0 {
                return Err(invalid(path, "dimension must be positive"));
            }
            Ok(AnyObject::Gaussian(GaussObject::new(dim as usize)))
        }
        _ => Err(invalid(path, "expected a label list or {\"dim\": n}")),
    }
}

fn number(path: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| invalid(path, "expected a number"))
}

fn vector(path: &str, v: Option<&Value>, len: usize) -> Result<DVector<f64>, CliError> {
    let items = v
        .and_then(Value::as_array)
        .ok_or_else(|| invalid(path, "expected an array of numbers"))?;
    if items.len() != len {
        return Err(invalid(path, format!("has length {}, expected {len}", items.len())));
    }
    let values = items
        .iter()
        .enumerate()
        .map(|(i, x)| number(&format!("{path}[{i}]"), x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DVector::from_vec(values))
}

/// Row-major nested array. A matrix with no columns may also be written `[]`.
fn matrix(path: &str, v: &Value, rows: usize, cols: usize) -> Result<DMatrix<f64>, CliError> {
    let items = v
        .as_array()
        .ok_or_else(|| invalid(path, "expected a nested array"))?;
    if cols == 0 && items.is_empty() {
        return Ok(DMatrix::zeros(rows, 0));
    }
    if items.len() != rows {
        return Err(invalid(path, format!("has {} rows, expected {rows}", items.len())));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in items.iter().enumerate() {
        let row = vector(&format!("{path}[{i}]"), Some(row), cols)?;
        m.set_row(i, &row.transpose());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_a_mixed_model() {
        let model = Model::from_json(
            r#"{"objects": {"X": ["a", "b"], "R": {"dim": 2}},
                "morphisms": {"f": {"dom": "X", "cod": ["X", "X"], "rows": [[0.5, 0.5, 0, 0], [0, 0, 0, 1]]}},
                "states": {"n": {"object": "R", "mean": [0, 1], "cov": [[1, 0], [0, 0]]}}}"#,
        )
        .unwrap();
        assert_eq!(model.morphisms["f"].as_finite().unwrap().n_cols(), 4);
        assert_eq!(model.states["n"].instance(), Instance::Gaussian);
    }

    #[test]
    fn errors_name_the_offending_entry() {
        let err = Model::from_json(
            r#"{"objects": {"X": ["a", "b"]},
                "morphisms": {"f": {"dom": "X", "cod": "X", "rows": [[0.5, 0.5], [0.7, 0.7]]}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("morphisms.f") && err.to_string().contains("row 1"));
        let err = Model::from_json(
            r#"{"objects": {"X": ["a"]}, "states": {"p": {"object": "X", "probs": ["x"]}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("states.p.probs[0]"));
    }

    #[test]
    fn finite_morphisms_cannot_use_gaussian_objects() {
        let err = Model::from_json(
            r#"{"objects": {"R": {"dim": 1}},
                "morphisms": {"f": {"dom": "R", "cod": "R", "rows": [[1]]}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("not a finite object"));
    }
}
