//! JSON encodings. `serde_json` keeps object keys sorted, so equal inputs
//! give byte-identical reports.

use std::collections::BTreeMap;

use glom_core::exactmath::{format_rational, Poly, Rational, Var};
use glom_core::invariants::QuadraticForm;
use serde_json::{json, Map, Value};

pub fn rational(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

/// Monomial to coefficient map; the constant monomial is `"1"`.
pub fn poly(p: &Poly) -> Value {
    let map: Map<String, Value> = p
        .terms()
        .map(|(m, c)| (m.to_string(), rational(c)))
        .collect();
    Value::Object(map)
}

pub fn polys(ps: &[Poly]) -> Value {
    Value::Array(ps.iter().map(poly).collect())
}

pub fn form(q: &QuadraticForm) -> Value {
    poly(&q.to_poly())
}

pub fn forms(qs: &[QuadraticForm]) -> Value {
    Value::Array(qs.iter().map(form).collect())
}

pub fn assignment(values: &BTreeMap<Var, Rational>) -> Value {
    let map: Map<String, Value> = values
        .iter()
        .map(|(v, q)| (v.to_string(), rational(q)))
        .collect();
    Value::Object(map)
}

pub fn triple(t: &(usize, usize, usize)) -> Value {
    json!([t.0, t.1, t.2])
}
