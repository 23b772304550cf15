//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::rational::{format_rational, Rational};
use super::vars::Var;

/// A power product, stored as `(var, exponent)` pairs sorted by variable
/// with no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    powers: SmallVec<[(Var, u32); 4]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: Var) -> Self {
        Monomial::power(v, 1)
    }

    pub fn power(v: Var, e: u32) -> Self {
        let mut powers = SmallVec::new();
        if e > 0 {
            powers.push((v, e));
        }
        Monomial { powers }
    }

    /// Builds a monomial from arbitrary `(var, exp)` pairs.
    pub fn from_powers(pairs: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut acc: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *acc.entry(v).or_default() += e;
        }
        Monomial {
            powers: acc.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    pub fn powers(&self) -> &[(Var, u32)] {
        &self.powers
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|&(_, e)| e).sum()
    }

    pub fn state_degree(&self) -> u32 {
        self.powers
            .iter()
            .filter(|(v, _)| v.is_state())
            .map(|&(_, e)| e)
            .sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.powers
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.powers.iter().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.powers, &other.powers);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { powers: out }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::new();
        let mut j = 0;
        let b = &other.powers;
        for &(v, e) in &self.powers {
            if j < b.len() && b[j].0 < v {
                return None;
            }
            if j < b.len() && b[j].0 == v {
                let f = b[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v, e - f)),
                }
            } else {
                out.push((v, e));
            }
        }
        (j == b.len()).then_some(Monomial { powers: out })
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::new();
        for &(v, e) in &self.powers {
            let f = other.exponent(v);
            if f > 0 {
                out.push((v, e.min(f)));
            }
        }
        Monomial { powers: out }
    }

    /// Splits into the state-variable part and the parameter part.
    pub fn split_state(&self) -> (Monomial, Monomial) {
        let (s, p): (SmallVec<_>, SmallVec<_>) =
            self.powers.iter().copied().partition(|(v, _)| v.is_state());
        (Monomial { powers: s }, Monomial { powers: p })
    }

    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> Monomial {
        Monomial::from_powers(self.powers.iter().map(|&(v, e)| (f(v), e)))
    }

    /// Lexicographic comparison of exponent vectors, lower-index variables
    /// most significant.
    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.powers, &other.powers);
        for (x, y) in a.iter().zip(b.iter()) {
            if x.0 != y.0 {
                // the monomial holding the smaller variable is larger
                return if x.0 < y.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
            if x.1 != y.1 {
                return x.1.cmp(&y.1);
            }
        }
        a.len().cmp(&b.len())
    }
}

/// Graded lexicographic order; state variables precede parameters.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (i, &(v, e)) in self.powers.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Canonical sparse polynomial: no zero coefficients are ever stored, so
/// structural equality is polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Monomial::var(v), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    /// Largest term in the monomial order.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn state_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(Monomial::state_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn depends_on_state(&self) -> bool {
        self.terms.keys().any(|m| m.vars().any(Var::is_state))
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(n, k)| (n.mul(m), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative.
    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let reduced = m.div(&Monomial::var(v)).expect("exponent checked");
            out.add_term(reduced, c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Replaces each listed variable by a polynomial; others are kept.
    pub fn substitute(&self, map: &BTreeMap<Var, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut keep = Vec::new();
            let mut factor = Poly::constant(c.clone());
            for &(v, e) in m.powers() {
                match map.get(&v) {
                    Some(p) => factor = &factor * &p.pow(e),
                    None => keep.push((v, e)),
                }
            }
            let kept = Monomial::from_powers(keep);
            for (n, k) in factor.terms {
                out.add_term(n.mul(&kept), k);
            }
        }
        out
    }

    /// Replaces each listed variable by a rational value.
    pub fn substitute_values(&self, map: &BTreeMap<Var, Rational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut keep = Vec::new();
            let mut k = c.clone();
            for &(v, e) in m.powers() {
                match map.get(&v) {
                    Some(x) => k *= num_traits::pow(x.clone(), e as usize),
                    None => keep.push((v, e)),
                }
                if k.is_zero() {
                    break;
                }
            }
            out.add_term(Monomial::from_powers(keep), k);
        }
        out
    }

    /// Full evaluation; `None` if some variable has no value.
    pub fn eval(&self, map: &BTreeMap<Var, Rational>) -> Option<Rational> {
        self.substitute_values(map).constant_value()
    }

    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.rename(f), c.clone())))
    }

    /// Groups terms by their state-variable monomial; each value is a
    /// polynomial in the parameters only.
    pub fn split_state(&self) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (s, p) = m.split_state();
            out.entry(s).or_default().add_term(p, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        if d.len() == 1 {
            let inv = dc.recip();
            let mut terms = BTreeMap::new();
            for (m, c) in &self.terms {
                terms.insert(m.div(dm)?, c * &inv);
            }
            return Some(Poly { terms });
        }
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        while let Some((lm, lc)) = rem.leading() {
            let qm = lm.div(&dm)?;
            let qc = lc / &dc;
            rem -= &d.mul_monomial(&qm, &qc);
            quo.add_term(qm, qc);
        }
        Some(quo)
    }

    /// Greatest common monomial factor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    /// Rational content: scales coefficients to coprime integers with a
    /// positive leading coefficient.
    pub fn primitive(&self) -> Poly {
        let Some((_, lead)) = self.leading() else {
            return Poly::zero();
        };
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        let mut scale = Rational::new(den, num);
        if lead.is_negative() {
            scale = -scale;
        }
        self.scale(&scale)
    }

    /// `Some(c)` with `self == c * other`, `c` rational.
    pub fn rational_multiple_of(&self, other: &Poly) -> Option<Rational> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Some(Rational::zero()),
            (true, false) => return Some(Rational::zero()),
            (false, true) => return None,
            _ => {}
        }
        if self.len() != other.len() {
            return None;
        }
        let (m1, c1) = self.leading()?;
        let (m2, c2) = other.leading()?;
        if m1 != m2 {
            return None;
        }
        let c = c1 / c2;
        (other.scale(&c) == *self).then_some(c)
    }
}

/// Removes the common rational content and common monomial factor of a
/// vector of polynomials, and fixes the sign so that the leading
/// coefficient of the first nonzero entry is positive.
pub fn normalize_vector(v: &mut [Poly]) {
    let nonzero: Vec<&Poly> = v.iter().filter(|p| !p.is_zero()).collect();
    if nonzero.is_empty() {
        return;
    }
    let mut g = BigInt::zero();
    let mut l = BigInt::one();
    let mut mono: Option<Monomial> = None;
    for p in &nonzero {
        for (m, c) in p.terms() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
            mono = Some(match mono {
                None => m.clone(),
                Some(acc) => acc.gcd(m),
            });
        }
    }
    let lead_negative = nonzero[0]
        .leading()
        .map(|(_, c)| c.is_negative())
        .unwrap_or(false);
    let mut factor = Rational::new(l, g);
    if lead_negative {
        factor = -factor;
    }
    let mono = mono.unwrap_or_default();
    for p in v.iter_mut() {
        if p.is_zero() {
            continue;
        }
        let terms = std::mem::take(&mut p.terms);
        p.terms = terms
            .into_iter()
            .map(|(m, c)| (m.div(&mono).expect("common factor"), c * &factor))
            .collect();
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if m.is_one() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl From<Var> for Poly {
    fn from(v: Var) -> Self {
        Poly::var(v)
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        if self.len() < rhs.len() {
            let mut r = rhs;
            r += &self;
            return r;
        }
        self += &rhs;
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let (small, large) = if self.len() <= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = Poly::zero();
        for (m, c) in &small.terms {
            for (n, k) in &large.terms {
                out.add_term(m.mul(n), c * k);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::{rat, ratio};
    use crate::exactmath::vars::ParamKind;
    use proptest::prelude::*;

    fn x(i: usize) -> Poly {
        Poly::var(Var::state(i))
    }
    fn p(kind: ParamKind, k: usize) -> Poly {
        Poly::var(Var::param(kind, k))
    }

    #[test]
    fn monomial_product() {
        let sq = &x(1) * &x(1);
        assert_eq!(sq, Poly::term(Monomial::power(Var::state(1), 2), rat(1)));
    }

    #[test]
    fn derivative_recovers_field_entry() {
        // d/dx2 (p1 x2 + b1) = p1
        let e = &(&p(ParamKind::P, 1) * &x(2)) + &p(ParamKind::B, 1);
        assert_eq!(e.derivative(Var::state(2)), p(ParamKind::P, 1));
    }

    #[test]
    fn substitution_by_hand() {
        // q1 x3 x1 - a1 x3 at x1=2, x2=3, q1=1, a1=1 is x3
        let e = &(&(&p(ParamKind::Q, 1) * &x(3)) * &x(1)) - &(&p(ParamKind::A, 1) * &x(3));
        let map: BTreeMap<Var, Rational> = [
            (Var::state(1), rat(2)),
            (Var::state(2), rat(3)),
            (Var::param(ParamKind::Q, 1), rat(1)),
            (Var::param(ParamKind::A, 1), rat(1)),
        ]
        .into_iter()
        .collect();
        assert_eq!(e.substitute_values(&map), x(3));
    }

    #[test]
    fn exact_division() {
        let a = &x(1) + &p(ParamKind::A, 2);
        let b = &(&x(2) * &x(2)) - &Poly::constant(ratio(1, 3));
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!((&prod + &Poly::one()).div_exact(&a), None);
        assert_eq!(Poly::zero().div_exact(&a), Some(Poly::zero()));
    }

    #[test]
    fn normalization_removes_content_and_monomials() {
        let a1 = p(ParamKind::A, 1);
        let mut v = vec![
            (&a1 * &x(1)).scale(&rat(-4)),
            Poly::zero(),
            (&(&a1 * &a1) * &x(2)).scale(&ratio(2, 3)),
        ];
        normalize_vector(&mut v);
        assert_eq!(v[0], x(1).scale(&rat(6)));
        assert_eq!(v[2], (&a1 * &x(2)).scale(&rat(-1)));
    }

    #[test]
    fn display_is_readable() {
        let e = &(&p(ParamKind::Q, 1) * &x(1)).scale(&rat(-1)) + &p(ParamKind::A, 1);
        assert_eq!(e.to_string(), "-x1*q1 + a1");
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        let term = (0usize..3, 0u32..3, 1usize..3, 0u32..2, -5i64..6);
        proptest::collection::vec(term, 0..5).prop_map(|ts| {
            Poly::from_terms(ts.into_iter().map(|(i, e, k, f, c)| {
                (
                    Monomial::from_powers([
                        (Var::state(i + 1), e),
                        (Var::param(ParamKind::P, k), f),
                    ]),
                    rat(c),
                )
            }))
        })
    }

    proptest! {
        #[test]
        fn ring_operations_commute(a in arb_poly(), b in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&(&a + &b) - &b) == a);
        }

        #[test]
        fn product_divides_exactly(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).div_exact(&b), Some(a));
        }
    }
}
