mod common;

use std::collections::BTreeMap;

use glom_core::exactmath::matrix::{rational_rank, seeded_rng};
use glom_core::exactmath::{ratio, Poly, Rational, Var};
use glom_core::glom::{builtin_model, energy_poly, find_sign_symmetries, Glom};
use glom_core::hamiltonian::{build_j, casimirs, jacobi};
use glom_core::hierarchy::{generate, incremental_conditions, Family, HierarchySpec};
use glom_core::invariants::{count_invariants, forms_in_span, unknown_count, QuadraticForm};
use proptest::prelude::*;
use rand::Rng;

const COUPLED: &[&str] = &[
    "gyrostat",
    "model1",
    "model1-nlf",
    "model2",
    "model2-nlf",
    "model3",
    "model3-nlf",
];

const HAMILTONIAN: &[&str] = &["gyrostat", "euler", "model1-ham-b", "model2-hamiltonian"];

fn zero_some(g: &Glom, mask: u64) -> Glom {
    let zeros: Vec<Var> = g
        .generic_params()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
        .map(|(_, v)| v)
        .collect();
    g.with_zero(&zeros).unwrap()
}

fn instance(g: &Glom, seed: u64) -> Glom {
    let mut rng = seeded_rng(seed);
    let values: BTreeMap<Var, Rational> = g
        .generic_params()
        .into_iter()
        .map(|p| {
            let n: i64 = rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 };
            (p, ratio(n, rng.gen_range(1..=3)))
        })
        .collect();
    g.instantiate(&values).unwrap()
}

/// Invariant count by evaluating `dC/dt` for each unit unknown at random
/// state points and taking the nullity of the sample matrix.
fn sampled_invariant_count(g: &Glom, seed: u64) -> usize {
    let m = g.modes();
    let cols = unknown_count(m);
    let field = g.assemble_field();
    let rates: Vec<Poly> = (0..cols)
        .map(|k| {
            let mut unit = vec![Rational::from_integer(0.into()); cols];
            unit[k] = Rational::from_integer(1.into());
            let form = QuadraticForm::from_rationals(m, &unit).unwrap();
            field.derivative_along(&form.to_poly())
        })
        .collect();
    let mut rng = seeded_rng(seed);
    // a cubic in M variables is pinned down by far fewer samples than this
    let samples = 4 * cols + 40;
    let rows: Vec<Vec<Rational>> = (0..samples)
        .map(|_| {
            let point: BTreeMap<Var, Rational> = (1..=m)
                .map(|i| {
                    (
                        Var::state(i),
                        ratio(rng.gen_range(-1000..=1000), rng.gen_range(1..=97)),
                    )
                })
                .collect();
            rates.iter().map(|r| r.eval(&point).unwrap()).collect()
        })
        .collect();
    cols - rational_rank(&rows, cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invariant_count_matches_sampling(idx in 0..COUPLED.len(), mask: u64, seed: u64) {
        let g = instance(&zero_some(&builtin_model(COUPLED[idx]).unwrap(), mask), seed);
        let exact = count_invariants(&g, seed).unwrap().raw_count;
        prop_assert_eq!(exact, sampled_invariant_count(&g, seed));
    }

    #[test]
    fn energy_is_always_conserved(idx in 0..COUPLED.len(), mask: u64) {
        let g = zero_some(&builtin_model(COUPLED[idx]).unwrap(), mask);
        prop_assert!(g.assemble_field().derivative_along(&energy_poly(g.modes())).is_zero());
        prop_assert!(count_invariants(&g, 1).unwrap().energy_included);
    }

    #[test]
    fn invariant_span_is_closed_under_sign_symmetries(idx in 0..COUPLED.len(), mask: u64) {
        let g = zero_some(&builtin_model(COUPLED[idx]).unwrap(), mask);
        let basis = count_invariants(&g, 5).unwrap().basis;
        let cols = unknown_count(g.modes());
        let rank = |forms: &[QuadraticForm]| {
            let rows: Vec<Vec<Rational>> =
                forms.iter().map(|f| f.rational_unknowns().unwrap()).collect();
            rational_rank(&rows, cols)
        };
        let base = rank(&basis);
        for s in find_sign_symmetries(&g).unwrap() {
            let mut with = basis.clone();
            with.extend(basis.iter().map(|f| f.apply_sign(&s)));
            prop_assert_eq!(rank(&with), base);
        }
    }

    #[test]
    fn casimirs_annihilate_j_and_are_invariants(idx in 0..HAMILTONIAN.len(), seed: u64) {
        let g = instance(&builtin_model(HAMILTONIAN[idx]).unwrap(), seed);
        let j = build_j(&g).unwrap();
        let field = g.assemble_field();
        let set = casimirs(&g, seed).unwrap();
        prop_assert!(!set.casimirs.is_empty());
        for c in &set.casimirs {
            let image = j.matrix.mul_vec(&c.gradient()).unwrap();
            prop_assert!(image.iter().all(Poly::is_zero));
            prop_assert!(field.derivative_along(&c.to_poly()).is_zero());
        }
    }

    #[test]
    fn odd_dimensional_j_is_singular(idx in 0..COUPLED.len(), seed: u64) {
        let g = instance(&builtin_model(COUPLED[idx]).unwrap(), seed);
        prop_assume!(g.modes() % 2 == 1);
        let set = casimirs(&g, seed).unwrap();
        prop_assert!(!set.nullspace_basis.is_empty());
    }
}

#[test]
fn symbolic_casimirs_lie_in_the_invariant_span() {
    for name in HAMILTONIAN {
        let g = builtin_model(name).unwrap();
        let set = casimirs(&g, 9).unwrap();
        let ok = forms_in_span(&g, &set.casimirs, 3, 9).unwrap();
        assert!(ok.iter().all(|b| *b), "{name}");
    }
}

#[test]
fn incremental_residuals_telescope() {
    for family in [
        Family::Sparse,
        Family::Dense1,
        Family::Model4,
        Family::Model5,
    ] {
        let k_max = family.cap().unwrap_or(4).min(4);
        let members = generate(&HierarchySpec::unconstrained(family, k_max).unwrap()).unwrap();
        let conds = incremental_conditions(family, k_max).unwrap();
        let sum = |g: &Glom| {
            jacobi(&build_j(g).unwrap())
                .residuals
                .values()
                .fold(Poly::zero(), |acc, p| &acc + p)
        };
        let telescoped = conds
            .iter()
            .fold(sum(&members[0]), |acc, c| &acc + &c.combined());
        assert_eq!(telescoped, sum(members.last().unwrap()), "{family}");
    }
}

#[test]
fn sampling_oracle_agrees_on_euler() {
    let mut values = BTreeMap::new();
    values.insert(common::var("p1"), ratio(2, 1));
    values.insert(common::var("q1"), ratio(-3, 1));
    let g = builtin_model("euler")
        .unwrap()
        .instantiate(&values)
        .unwrap();
    assert_eq!(
        sampled_invariant_count(&g, 4),
        count_invariants(&g, 4).unwrap().raw_count
    );
}
