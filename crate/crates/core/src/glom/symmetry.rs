//! Sign symmetries `x -> S x` with `S = diag(+-1)` that preserve the field.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::exactmath::{Monomial, Poly};

use super::Glom;

/// Enumeration covers all `2^M` sign vectors, so `M` is capped.
pub const MAX_SYMMETRY_MODES: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignSymmetry {
    /// Entry `i` is the sign applied to `x_{i+1}`.
    pub signs: Vec<i8>,
}

impl SignSymmetry {
    fn from_mask(mask: u32, modes: usize) -> Self {
        SignSymmetry {
            signs: (0..modes)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn compose(&self, other: &SignSymmetry) -> SignSymmetry {
        SignSymmetry {
            signs: self
                .signs
                .iter()
                .zip(&other.signs)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    /// `p(S x)`.
    pub fn apply(&self, p: &Poly) -> Poly {
        Poly::from_terms(p.terms().map(|(m, c)| {
            let odd = m
                .powers()
                .iter()
                .filter(|(v, e)| {
                    v.state_index()
                        .is_some_and(|i| e % 2 == 1 && self.signs[i - 1] < 0)
                })
                .count();
            (m.clone(), if odd % 2 == 1 { -c.clone() } else { c.clone() })
        }))
    }
}

fn parity_mask(m: &Monomial) -> u32 {
    m.powers()
        .iter()
        .filter(|(v, e)| v.is_state() && e % 2 == 1)
        .fold(0, |acc, (v, _)| acc | 1 << (v.state_index().unwrap() - 1))
}

/// All non-identity sign vectors `S` with `f(S x) = S f(x)`, in increasing
/// order of the bitmask of negated modes (bit `i-1` for `x_i`). Parameters
/// are generic, so each state monomial of each component imposes its own
/// parity condition.
pub fn find_sign_symmetries(g: &Glom) -> Result<Vec<SignSymmetry>> {
    let m = g.modes();
    if m > MAX_SYMMETRY_MODES {
        return Err(Error::SizeBound(format!(
            "sign-symmetry enumeration supports at most {MAX_SYMMETRY_MODES} modes, got {m}"
        )));
    }
    let field = g.assemble_field();
    // A term of component i with state monomial u is preserved iff the
    // number of negated modes among (odd(u) xor {i}) is even.
    let constraints: BTreeSet<u32> = field
        .components
        .iter()
        .enumerate()
        .flat_map(|(i, f)| {
            f.split_state()
                .into_keys()
                .map(move |u| parity_mask(&u) ^ (1 << i))
                .collect::<Vec<_>>()
        })
        .collect();
    let constraints: Vec<u32> = constraints.into_iter().filter(|&c| c != 0).collect();
    Ok((1u32..(1u32 << m))
        .filter(|mask| constraints.iter().all(|c| (mask & c).count_ones() % 2 == 0))
        .map(|mask| SignSymmetry::from_mask(mask, m))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glom::builtin_model;

    #[test]
    fn euler_has_three() {
        let s = find_sign_symmetries(&builtin_model("euler").unwrap()).unwrap();
        let signs: Vec<_> = s.iter().map(|s| s.signs.clone()).collect();
        assert_eq!(
            signs,
            vec![vec![-1, -1, 1], vec![-1, 1, -1], vec![1, -1, -1]]
        );
    }

    #[test]
    fn generic_model1_has_none() {
        assert!(find_sign_symmetries(&builtin_model("model1").unwrap())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn size_bound_enforced() {
        let g = builtin_model("sparse(12)").unwrap();
        assert!(matches!(find_sign_symmetries(&g), Err(Error::SizeBound(_))));
    }

    #[test]
    fn symmetries_preserve_field() {
        let g = builtin_model("model2-nlf").unwrap();
        let f = g.assemble_field();
        for s in find_sign_symmetries(&g).unwrap() {
            for (i, comp) in f.components.iter().enumerate() {
                assert_eq!(
                    s.apply(comp),
                    comp.scale(&crate::exactmath::rat(s.signs[i] as i64))
                );
            }
        }
    }
}
