//! Helpers shared by the integration tests.

#![allow(dead_code)]

use glom_core::exactmath::{parse_rational, Poly, Var};

pub fn var(name: &str) -> Var {
    Var::parse(name).unwrap_or_else(|| panic!("bad variable {name}"))
}

pub fn v(name: &str) -> Poly {
    Poly::var(var(name))
}

pub fn x(i: usize) -> Poly {
    Poly::var(Var::state(i))
}

/// Parses a sum of products such as `a2*a1 - a2*q1*x1 + 1/2*p1`. No
/// parentheses; each factor is a rational or a variable name.
pub fn poly(text: &str) -> Poly {
    let mut out = Poly::zero();
    let mut sign = 1;
    let mut term = String::new();
    let flush = |term: &mut String, sign: i64, out: &mut Poly| {
        let t = term.trim();
        if t.is_empty() {
            return;
        }
        let mut p = Poly::int(sign);
        for f in t.split('*') {
            let f = f.trim();
            let factor = if f.starts_with(|c: char| c.is_ascii_digit()) {
                Poly::constant(parse_rational(f).expect("rational factor"))
            } else {
                v(f)
            };
            p = &p * &factor;
        }
        *out = &*out + &p;
        term.clear();
    };
    for ch in text.chars() {
        match ch {
            '+' | '-' => {
                flush(&mut term, sign, &mut out);
                sign = if ch == '-' { -1 } else { 1 };
            }
            _ => term.push(ch),
        }
    }
    flush(&mut term, sign, &mut out);
    out
}

pub fn vector(entries: &[&str]) -> Vec<Poly> {
    entries.iter().map(|e| poly(e)).collect()
}
