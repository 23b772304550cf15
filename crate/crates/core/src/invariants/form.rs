use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exactmath::{ratio, Poly, Rational, Var};
use crate::glom::SignSymmetry;

/// Number of `(i, j)` pairs with `1 <= i < j <= m`.
pub fn pair_count(m: usize) -> usize {
    m * (m - 1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, 1-based, in lexicographic order.
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= m);
    let before: usize = (1..i).map(|r| m - r).sum();
    before + (j - i - 1)
}

/// Pairs in lexicographic order.
pub fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=m).flat_map(move |i| (i + 1..=m).map(move |j| (i, j)))
}

/// Number of unknowns `(d, e, f)` of a general quadratic form in `m` modes.
pub fn unknown_count(m: usize) -> usize {
    m * (m + 3) / 2
}

/// `C = 1/2 sum d_i x_i^2 + sum_{i<j} e_ij x_i x_j + sum f_i x_i`.
/// Coefficients are polynomials in the parameters, or constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    pub modes: usize,
    pub d: Vec<Poly>,
    /// Indexed by [`pair_index`].
    pub e: Vec<Poly>,
    pub f: Vec<Poly>,
}

impl QuadraticForm {
    pub fn zero(modes: usize) -> Self {
        QuadraticForm {
            modes,
            d: vec![Poly::zero(); modes],
            e: vec![Poly::zero(); pair_count(modes)],
            f: vec![Poly::zero(); modes],
        }
    }

    /// `1/2 sum x_i^2`.
    pub fn energy(modes: usize) -> Self {
        let mut q = Self::zero(modes);
        q.d = vec![Poly::one(); modes];
        q
    }

    /// Reads the unknown vector laid out as `d_1..d_M, e_12..e_{M-1,M},
    /// f_1..f_M`.
    pub fn from_unknowns(modes: usize, v: &[Poly]) -> Result<Self> {
        if v.len() != unknown_count(modes) {
            return Err(Error::Contract(format!(
                "{} unknowns for {modes} modes, expected {}",
                v.len(),
                unknown_count(modes)
            )));
        }
        let np = pair_count(modes);
        Ok(QuadraticForm {
            modes,
            d: v[..modes].to_vec(),
            e: v[modes..modes + np].to_vec(),
            f: v[modes + np..].to_vec(),
        })
    }

    pub fn from_rationals(modes: usize, v: &[Rational]) -> Result<Self> {
        let polys: Vec<Poly> = v.iter().cloned().map(Poly::constant).collect();
        Self::from_unknowns(modes, &polys)
    }

    pub fn unknowns(&self) -> Vec<Poly> {
        self.d
            .iter()
            .chain(&self.e)
            .chain(&self.f)
            .cloned()
            .collect()
    }

    /// Coefficient vector when every coefficient is a constant.
    pub fn rational_unknowns(&self) -> Option<Vec<Rational>> {
        self.unknowns().iter().map(Poly::constant_value).collect()
    }

    pub fn e_coeff(&self, i: usize, j: usize) -> &Poly {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        &self.e[pair_index(self.modes, i, j)]
    }

    pub fn is_zero(&self) -> bool {
        self.d
            .iter()
            .chain(&self.e)
            .chain(&self.f)
            .all(Poly::is_zero)
    }

    pub fn to_poly(&self) -> Poly {
        let x = |i| Poly::var(Var::state(i));
        let half = ratio(1, 2);
        let mut out = Poly::zero();
        for i in 1..=self.modes {
            out += &(&(&x(i) * &x(i)) * &self.d[i - 1]).scale(&half);
            out += &(&x(i) * &self.f[i - 1]);
        }
        for (i, j) in pairs(self.modes) {
            let e = &self.e[pair_index(self.modes, i, j)];
            if !e.is_zero() {
                out += &(&(&x(i) * &x(j)) * e);
            }
        }
        out
    }

    /// Reads a polynomial of state-degree at most 2 with no constant
    /// term back into a form.
    pub fn from_poly(modes: usize, p: &Poly) -> Result<Self> {
        let mut q = Self::zero(modes);
        for (mono, coeff) in p.split_state() {
            let idx: Vec<(usize, u32)> = mono
                .powers()
                .iter()
                .map(|(v, e)| (v.state_index().unwrap(), *e))
                .collect();
            match idx.as_slice() {
                [(i, 2)] if *i <= modes => q.d[i - 1] = coeff.scale(&crate::exactmath::rat(2)),
                [(i, 1)] if *i <= modes => q.f[i - 1] = coeff,
                [(i, 1), (j, 1)] if *j <= modes => q.e[pair_index(modes, *i, *j)] = coeff,
                _ => {
                    return Err(Error::Contract(format!(
                        "term {mono} is not part of a quadratic form in {modes} modes"
                    )))
                }
            }
        }
        Ok(q)
    }

    pub fn gradient(&self) -> Vec<Poly> {
        let p = self.to_poly();
        (1..=self.modes)
            .map(|i| p.derivative(Var::state(i)))
            .collect()
    }

    pub fn substitute_values(&self, map: &BTreeMap<Var, Rational>) -> Self {
        let s = |v: &Vec<Poly>| v.iter().map(|p| p.substitute_values(map)).collect();
        QuadraticForm {
            modes: self.modes,
            d: s(&self.d),
            e: s(&self.e),
            f: s(&self.f),
        }
    }

    /// `C(S x)`.
    pub fn apply_sign(&self, s: &SignSymmetry) -> Self {
        let sg = |i: usize| crate::exactmath::rat(s.signs[i - 1] as i64);
        let mut out = self.clone();
        for i in 1..=self.modes {
            out.f[i - 1] = self.f[i - 1].scale(&sg(i));
        }
        for (i, j) in pairs(self.modes) {
            let k = pair_index(self.modes, i, j);
            out.e[k] = self.e[k].scale(&(sg(i) * sg(j)));
        }
        out
    }

    /// Pads with zero coefficients for extra trailing modes.
    pub fn embed(&self, modes: usize) -> Self {
        let mut out = Self::zero(modes);
        for i in 1..=self.modes {
            out.d[i - 1] = self.d[i - 1].clone();
            out.f[i - 1] = self.f[i - 1].clone();
        }
        for (i, j) in pairs(self.modes) {
            out.e[pair_index(modes, i, j)] = self.e[pair_index(self.modes, i, j)].clone();
        }
        out
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}
