//! Output as reloadable model fragments, with doubles printed to 17
//! significant digits so that a reload reproduces them bit for bit.

use std::io;

use bayeslens::dynamic::{AnyMorphism, AnyObject};
use bayeslens::{FinObject, GaussObject};
use nalgebra::{DMatrix, DVector};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use crate::model::Model;

/// Builds `{"objects", "morphisms", "states"}` with every referenced object
/// declared. Objects already named in the source model keep their names.
pub struct Fragment<'m> {
    model: &'m Model,
    objects: Vec<(String, AnyObject)>,
    morphisms: Map<String, Value>,
    states: Map<String, Value>,
    extra: Map<String, Value>,
}

impl<'m> Fragment<'m> {
    pub fn new(model: &'m Model) -> Self {
        Self {
            model,
            objects: Vec::new(),
            morphisms: Map::new(),
            states: Map::new(),
            extra: Map::new(),
        }
    }

    fn atoms(obj: &AnyObject) -> Vec<AnyObject> {
        match obj {
            AnyObject::Finite(x) => x
                .atoms()
                .iter()
                .map(|a| AnyObject::Finite(FinObject::from_atom((**a).clone())))
                .collect(),
            AnyObject::Gaussian(x) => x
                .atoms()
                .iter()
                .map(|&d| AnyObject::Gaussian(GaussObject::new(d)))
                .collect(),
        }
    }

    fn fresh(&self, hint: &str) -> String {
        let taken = |n: &str| {
            self.objects.iter().any(|(m, _)| m == n) || self.model.objects.contains_key(n)
        };
        if !taken(hint) {
            return hint.to_string();
        }
        (1..)
            .map(|i| format!("{hint}.{i}"))
            .find(|n| !taken(n))
            .expect("unbounded")
    }

    fn declare(&mut self, name: String, atom: AnyObject) -> String {
        if !self.objects.iter().any(|(n, _)| *n == name) {
            self.objects.push((name.clone(), atom));
        }
        name
    }

    fn atom_name(&mut self, atom: AnyObject, hint: &str) -> String {
        if let Some((n, _)) = self.model.objects.iter().find(|(_, o)| **o == atom) {
            return self.declare(n.clone(), atom);
        }
        if let Some((n, _)) = self.objects.iter().find(|(_, o)| *o == atom) {
            return n.clone();
        }
        let name = self.fresh(hint);
        self.declare(name, atom)
    }

    /// A name, or a list of names for a product, denoting `obj`.
    pub fn object_ref(&mut self, obj: &AnyObject, hint: &str) -> Value {
        let names: Vec<Value> = Self::atoms(obj)
            .into_iter()
            .map(|a| Value::String(self.atom_name(a, hint)))
            .collect();
        match <[Value; 1]>::try_from(names) {
            Ok([single]) => single,
            Err(names) => Value::Array(names),
        }
    }

    /// Declare a support carrier under `name` unless it is the base itself.
    pub fn carrier_ref(&mut self, carrier: &AnyObject, base: &AnyObject, name: &str) -> Value {
        if carrier == base {
            return self.object_ref(base, name);
        }
        let name = self.fresh(name);
        Value::String(self.declare(name, carrier.clone()))
    }

    pub fn morphism(&mut self, name: &str, f: &AnyMorphism, dom: Value, cod: Value) {
        let mut body = Map::new();
        body.insert("dom".into(), dom);
        body.insert("cod".into(), cod);
        match f {
            AnyMorphism::Finite(f) => {
                body.insert("rows".into(), rows(f.rows()));
            }
            AnyMorphism::Gaussian(f) => {
                body.insert("A".into(), matrix(f.a()));
                body.insert("b".into(), vector(f.b()));
                body.insert("Sigma".into(), matrix(f.sigma()));
            }
        }
        self.morphisms.insert(name.into(), Value::Object(body));
    }

    /// Emit a morphism whose endpoints are named after `hint`.
    pub fn morphism_auto(&mut self, name: &str, f: &AnyMorphism) {
        let dom = self.object_ref(&f.dom(), &format!("{name}.dom"));
        let cod = self.object_ref(&f.cod(), &format!("{name}.cod"));
        self.morphism(name, f, dom, cod);
    }

    pub fn state(&mut self, name: &str, pi: &AnyMorphism, object: Value) {
        let mut body = Map::new();
        body.insert("object".into(), object);
        match pi {
            AnyMorphism::Finite(p) => {
                body.insert("probs".into(), floats(p.probs().iter().copied()));
            }
            AnyMorphism::Gaussian(p) => {
                body.insert("mean".into(), vector(p.mean()));
                body.insert("cov".into(), matrix(p.cov()));
            }
        }
        self.states.insert(name.into(), Value::Object(body));
    }

    pub fn state_auto(&mut self, name: &str, pi: &AnyMorphism) {
        let object = self.object_ref(&pi.cod(), &format!("{name}.object"));
        self.state(name, pi, object);
    }

    pub fn extra(&mut self, key: &str, value: Value) {
        self.extra.insert(key.into(), value);
    }

    pub fn finish(self) -> Value {
        let mut out = Map::new();
        let objects: Map<String, Value> = self
            .objects
            .into_iter()
            .map(|(n, o)| (n, object_json(&o)))
            .collect();
        out.insert("objects".into(), Value::Object(objects));
        if !self.morphisms.is_empty() {
            out.insert("morphisms".into(), Value::Object(self.morphisms));
        }
        if !self.states.is_empty() {
            out.insert("states".into(), Value::Object(self.states));
        }
        out.extend(self.extra);
        Value::Object(out)
    }
}

fn object_json(atom: &AnyObject) -> Value {
    match atom {
        AnyObject::Finite(x) => Value::Array(x.labels().into_iter().map(Value::String).collect()),
        AnyObject::Gaussian(x) => serde_json::json!({ "dim": x.dim() }),
    }
}

pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn floats(values: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(values.into_iter().map(float).collect())
}

fn rows(rows: Vec<Vec<f64>>) -> Value {
    Value::Array(rows.into_iter().map(floats).collect())
}

fn vector(v: &DVector<f64>) -> Value {
    floats(v.iter().copied())
}

fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| floats(m.row(i).iter().copied()))
            .collect(),
    )
}

/// `v` with 17 significant digits, trailing zeros dropped.
pub fn sig17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0" } else { "0.0" }.into();
    }
    let s = format!("{v:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits = mantissa.replace('.', "");
    let digits = digits.trim_end_matches('0');
    if (0..17).contains(&exp) {
        let point = exp as usize + 1;
        if digits.len() <= point {
            format!("{sign}{digits}{}.0", "0".repeat(point - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..point], &digits[point..])
        }
    } else if (-5..0).contains(&exp) {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else if digits.len() == 1 {
        format!("{sign}{digits}e{exp}")
    } else {
        format!("{sign}{}.{}e{exp}", &digits[..1], &digits[1..])
    }
}

struct Sig17<F>(F);

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(sig17(value).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn render(value: &Value, pretty: bool) -> String {
    use serde::Serialize;
    let mut buf = Vec::new();
    let result = if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
        value.serialize(&mut ser)
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(CompactFormatter));
        value.serialize(&mut ser)
    };
    result.expect("serialising a JSON value into memory cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        assert_eq!(sig17(0.5), "0.5");
        assert_eq!(sig17(1.0), "1.0");
        assert_eq!(sig17(-2.0), "-2.0");
        assert_eq!(sig17(0.1), "0.10000000000000001");
        assert_eq!(sig17(1e-7), "9.9999999999999995e-8");
        assert_eq!(sig17(1e20), "1e20");
        assert_eq!(sig17(123.25), "123.25");
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MAX, f64::MIN_POSITIVE, 1e16, 0.00001234] {
            assert_eq!(sig17(v).parse::<f64>().unwrap().to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn rendered_numbers_are_valid_json() {
        let v = serde_json::json!({"x": [0.1, 2.0, 1e-9], "n": 3});
        let text = render(&v, false);
        assert_eq!(text, r#"{"x":[0.10000000000000001,2.0,1.0000000000000001e-9],"n":3}"#);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(serde_json::from_str::<Value>(&render(&v, true)).unwrap(), v);
    }
}
