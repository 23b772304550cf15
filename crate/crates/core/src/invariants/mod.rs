//! Quadratic invariants: the linear system forced by `dC/dt = 0`, generic
//! counting, basis reconstruction, functional independence and subclass
//! enumeration.

mod form;

pub use form::{pair_count, pair_index, pairs, unknown_count, QuadraticForm};

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactmath::matrix::{
    generic_rank_with_point, random_assignment, rational_nullspace, rational_rank, seeded_rng,
    DEFAULT_TRIALS,
};
use crate::exactmath::{Monomial, ParamKind, Poly, PolyMatrix, Rational, Var};
use crate::glom::{Glom, VectorField};

/// Upper bound on the number of parameters varied by
/// [`enumerate_subclasses`].
pub const MAX_VARY: usize = 20;

/// Linear system `A (d, e, f) = 0` whose solutions are the quadratic
/// invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSystem {
    pub modes: usize,
    pub matrix: PolyMatrix,
    /// State monomial whose coefficient each row collects.
    pub row_labels: Vec<Monomial>,
}

impl InvariantSystem {
    pub fn column_labels(&self) -> Vec<String> {
        let m = self.modes;
        (1..=m)
            .map(|i| format!("d{i}"))
            .chain(pairs(m).map(|(i, j)| format!("e{i}_{j}")))
            .chain((1..=m).map(|i| format!("f{i}")))
            .collect()
    }
}

/// Rates of change of each candidate basis term, in unknown order.
fn column_rates(field: &VectorField) -> Vec<Poly> {
    let m = field.modes();
    let x = |i| Poly::var(Var::state(i));
    let f = |i: usize| field.component(i);
    let mut cols = Vec::with_capacity(unknown_count(m));
    // d_i multiplies x_i^2 / 2, whose rate is x_i f_i
    for i in 1..=m {
        cols.push(&x(i) * f(i));
    }
    for (i, j) in pairs(m) {
        cols.push(&(&x(j) * f(i)) + &(&x(i) * f(j)));
    }
    for i in 1..=m {
        cols.push(f(i).clone());
    }
    cols
}

fn system_from_field(field: &VectorField) -> InvariantSystem {
    let m = field.modes();
    let cols = column_rates(field);
    let mut rows: BTreeMap<Monomial, Vec<Poly>> = BTreeMap::new();
    for (c, rate) in cols.iter().enumerate() {
        for (mono, coeff) in rate.split_state() {
            rows.entry(mono)
                .or_insert_with(|| vec![Poly::zero(); cols.len()])[c] = coeff;
        }
    }
    let (row_labels, data): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    InvariantSystem {
        modes: m,
        matrix: PolyMatrix::from_rows(cols.len(), data).expect("uniform rows"),
        row_labels,
    }
}

/// Collects the coefficients of every state monomial of `dC/dt` for the
/// fully general quadratic candidate.
pub fn build_system(g: &Glom) -> InvariantSystem {
    system_from_field(&g.assemble_field())
}

/// Result of [`count_invariants`].
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    /// Dimension of the solution space of the invariant system.
    pub raw_count: usize,
    /// Number of functionally independent invariants among the basis.
    pub independent_count: usize,
    /// Basis with numeric coefficients.
    pub basis: Vec<QuadraticForm>,
    /// Whether `1/2 sum x_i^2` lies in the span of the basis.
    pub energy_included: bool,
    /// Parameter values used to reconstruct the basis; empty when the
    /// model has no free parameters, in which case the basis is exact.
    pub instance: BTreeMap<Var, Rational>,
    pub rows: usize,
    pub cols: usize,
}

fn rank_of_forms(forms: &[QuadraticForm], cols: usize) -> usize {
    let rows: Vec<Vec<Rational>> = forms
        .iter()
        .map(|f| f.rational_unknowns().expect("numeric form"))
        .collect();
    rational_rank(&rows, cols)
}

/// Number of functionally independent members of a numeric basis: the
/// maximum rank of the gradient matrix over `trials` random state points.
pub fn independent_count(basis: &[QuadraticForm], modes: usize, seed: u64) -> usize {
    if basis.is_empty() {
        return 0;
    }
    let grads: Vec<Vec<Poly>> = basis.iter().map(QuadraticForm::gradient).collect();
    let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut best = 0;
    for _ in 0..DEFAULT_TRIALS {
        let point = random_assignment((1..=modes).map(Var::state), &mut rng);
        let rows: Vec<Vec<Rational>> = grads
            .iter()
            .map(|g| {
                g.iter()
                    .map(|p| p.eval(&point).expect("numeric gradient"))
                    .collect()
            })
            .collect();
        best = best.max(rational_rank(&rows, modes));
        if best == basis.len().min(modes) {
            break;
        }
    }
    best
}

fn numeric_basis(sys: &InvariantSystem, point: &BTreeMap<Var, Rational>) -> Vec<QuadraticForm> {
    let inst = sys
        .matrix
        .substitute_values(point)
        .to_rationals()
        .expect("all parameters substituted");
    rational_nullspace(&inst, sys.matrix.cols())
        .into_iter()
        .map(|v| QuadraticForm::from_rationals(sys.modes, &v).expect("sized"))
        .collect()
}

/// Counts invariants of `g` with its free parameters treated as generic.
pub fn count_invariants(g: &Glom, seed: u64) -> Result<InvariantReport> {
    let sys = build_system(g);
    let generic: BTreeSet<Var> = g.generic_params();
    let cols = sys.matrix.cols();
    let (rank, point) = generic_rank_with_point(&sys.matrix, &generic, DEFAULT_TRIALS, seed)?;
    let basis = numeric_basis(&sys, &point);
    debug_assert_eq!(basis.len(), cols - rank);
    let independent = independent_count(&basis, g.modes(), seed);
    let energy_included = {
        let mut with = basis.clone();
        with.push(QuadraticForm::energy(g.modes()));
        rank_of_forms(&with, cols) == basis.len()
    };
    Ok(InvariantReport {
        raw_count: cols - rank,
        independent_count: independent,
        basis,
        energy_included,
        instance: point,
        rows: sys.matrix.rows(),
        cols,
    })
}

/// Whether each candidate lies in the span of the invariant basis at
/// `trials` random parameter points. Candidates may carry symbolic
/// coefficients; they are instantiated at the same points.
pub fn forms_in_span(
    g: &Glom,
    candidates: &[QuadraticForm],
    trials: usize,
    seed: u64,
) -> Result<Vec<bool>> {
    if trials < 1 {
        return Err(Error::Contract("span test needs at least one trial".into()));
    }
    let sys = build_system(g);
    let cols = sys.matrix.cols();
    let mut params: BTreeSet<Var> = g.generic_params();
    for c in candidates {
        if c.modes != g.modes() {
            return Err(Error::Contract(format!(
                "candidate has {} modes, model has {}",
                c.modes,
                g.modes()
            )));
        }
        params.extend(c.unknowns().iter().flat_map(Poly::vars));
    }
    if let Some(v) = params.iter().find(|v| v.is_state()) {
        return Err(Error::Contract(format!(
            "candidate coefficient depends on state variable {v}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut ok = vec![true; candidates.len()];
    for _ in 0..trials {
        let point = random_assignment(params.iter().copied(), &mut rng);
        let basis = numeric_basis(&sys, &point);
        let base_rank = basis.len();
        for (k, c) in candidates.iter().enumerate() {
            let mut with = basis.clone();
            with.push(c.substitute_values(&point));
            if rank_of_forms(&with, cols) != base_rank {
                ok[k] = false;
            }
        }
    }
    Ok(ok)
}

/// Invariant report for the sparse chain of `k` gyrostats with no linear
/// feedback.
pub fn sparse_invariants(k: usize, seed: u64) -> Result<InvariantReport> {
    let g = crate::glom::sparse(k)?.without_linear_feedback();
    count_invariants(&g, seed)
}

/// One row of a subclass table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubclassRow {
    /// One character per varied parameter, leftmost first; `1` keeps the
    /// parameter's spec, `0` sets it to zero.
    pub mask: String,
    pub zeroed: Vec<Var>,
    pub raw_count: usize,
    pub independent_count: usize,
}

fn check_settable(g: &Glom, names: &[Var]) -> Result<()> {
    let known: BTreeSet<Var> = g.param_names().into_iter().collect();
    for v in names {
        match v.as_param() {
            Some((ParamKind::R, _)) => {
                return Err(Error::Contract(format!(
                    "{v} is derived from p and q and cannot be varied"
                )))
            }
            Some(_) if known.contains(v) => {}
            _ => {
                return Err(Error::Contract(format!(
                    "{v} is not a parameter of the model"
                )))
            }
        }
    }
    Ok(())
}

/// Counts invariants for every zero/nonzero pattern of `vary`, ordered by
/// mask value.
pub fn enumerate_subclasses(g: &Glom, vary: &[Var], seed: u64) -> Result<Vec<SubclassRow>> {
    if vary.len() > MAX_VARY {
        return Err(Error::SizeBound(format!(
            "at most {MAX_VARY} parameters may be varied, got {}",
            vary.len()
        )));
    }
    check_settable(g, vary)?;
    let n = vary.len();
    (0u32..(1u32 << n))
        .into_par_iter()
        .map(|mask| {
            let bits: String = (0..n)
                .map(|i| {
                    if mask >> (n - 1 - i) & 1 == 1 {
                        '1'
                    } else {
                        '0'
                    }
                })
                .collect();
            let zeroed: Vec<Var> = bits
                .chars()
                .zip(vary)
                .filter(|(c, _)| *c == '0')
                .map(|(_, v)| *v)
                .collect();
            let sub = g.with_zero(&zeroed)?;
            let rep = count_invariants(&sub, seed)?;
            Ok(SubclassRow {
                mask: bits,
                zeroed,
                raw_count: rep.raw_count,
                independent_count: rep.independent_count,
            })
        })
        .collect()
}

/// True when zeroing `extra_zeros` does not lower the raw invariant count.
pub fn monotonicity_check(g: &Glom, extra_zeros: &[Var], seed: u64) -> Result<bool> {
    check_settable(g, extra_zeros)?;
    for v in extra_zeros {
        let (kind, k) = v.as_param().expect("checked");
        if !g.gyrostats()[k - 1]
            .spec(kind)
            .is_some_and(|s| s.is_generic())
        {
            return Err(Error::Contract(format!("{v} is not currently generic")));
        }
    }
    let base = count_invariants(g, seed)?.raw_count;
    let sub = count_invariants(&g.with_zero(extra_zeros)?, seed)?.raw_count;
    Ok(sub >= base)
}
