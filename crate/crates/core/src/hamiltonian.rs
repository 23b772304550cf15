//! Poisson structure of a model: the skew matrix `J` with `J x = f`, the
//! Jacobi identity, and Casimirs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactmath::matrix::{random_assignment, rational_rank, seeded_rng, DEFAULT_TRIALS};
use crate::exactmath::poly::normalize_vector;
use crate::exactmath::{nullspace_symbolic, Monomial, Poly, PolyMatrix, Rational, Var};
use crate::glom::Glom;
use crate::invariants::{pairs, unknown_count, QuadraticForm};

/// Fixed representation of `J`: each gyrostat's `r` is eliminated in favour
/// of `p` and `q`.
pub const J_CONVENTION: &str =
    "r eliminated: J[m1][m2] = -c, J[m1][m3] = p x_m2 + b, J[m2][m3] = q x_m1 - a";

/// Skew-symmetric matrix with entries affine in the state.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewPolyMatrix {
    pub matrix: PolyMatrix,
}

impl SkewPolyMatrix {
    pub fn modes(&self) -> usize {
        self.matrix.rows()
    }

    /// Entry `(i, j)`, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        self.matrix.get(i - 1, j - 1)
    }
}

/// Contribution of gyrostat `k` (1-based) alone.
pub fn gyrostat_block(g: &Glom, k: usize) -> PolyMatrix {
    let mut j = PolyMatrix::zeros(g.modes(), g.modes());
    add_block(g, k, &mut j);
    j
}

fn add_block(g: &Glom, k: usize, j: &mut PolyMatrix) {
    let [m1, m2, m3] = g.gyrostats()[k - 1].modes;
    let c = g.coefficients(k);
    let x = |i| Poly::var(Var::state(i));
    let e12 = -&c.c;
    let e13 = &(&c.p * &x(m2)) + &c.b;
    let e23 = &(&c.q * &x(m1)) - &c.a;
    for (a, b, e) in [(m1, m2, e12), (m1, m3, e13), (m2, m3, e23)] {
        j.add_to(a - 1, b - 1, &e);
        j.add_to(b - 1, a - 1, &-&e);
    }
}

/// `J = sum_k J^(k)`. Refuses models that violate the energy constraint,
/// since then `J x` would not reproduce the field.
pub fn build_j(g: &Glom) -> Result<SkewPolyMatrix> {
    g.require_energy()?;
    let m = g.modes();
    let mut j = PolyMatrix::zeros(m, m);
    for k in 1..=g.k() {
        add_block(g, k, &mut j);
    }
    let x: Vec<Poly> = (1..=m).map(|i| Poly::var(Var::state(i))).collect();
    let jx = j.mul_vec(&x)?;
    if jx != g.assemble_field().components {
        return Err(Error::Inconsistent(
            "J x does not reproduce the field".into(),
        ));
    }
    for a in 0..m {
        for b in 0..m {
            if *j.get(a, b) != -j.get(b, a) {
                return Err(Error::Inconsistent(format!(
                    "J is not skew at ({}, {})",
                    a + 1,
                    b + 1
                )));
            }
        }
    }
    Ok(SkewPolyMatrix { matrix: j })
}

/// Per-triple Jacobi residuals of `J` and the parameter conditions they
/// impose.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiReport {
    /// Nonzero residuals keyed by 1-based `(i, j, k)`, `i < j < k`.
    pub residuals: BTreeMap<(usize, usize, usize), Poly>,
    pub is_hamiltonian: bool,
    /// Coefficients of the residuals over state monomials, made primitive
    /// and deduplicated; ordered by first appearance.
    pub constraint_polys: Vec<Poly>,
    pub convention: &'static str,
    /// Fully contracted scalar `eps_ijk J_im dJ_jk/dx_m` over ordered
    /// distinct triples, twice the sum of the residuals. It can vanish
    /// through cancellation while individual residuals do not.
    pub contracted: Poly,
}

impl JacobiReport {
    /// The contracted scalar vanishes but some triple does not.
    pub fn contracted_diverges(&self) -> bool {
        self.contracted.is_zero() && !self.is_hamiltonian
    }
}

fn contracted_of<'a>(residuals: impl IntoIterator<Item = &'a Poly>) -> Poly {
    let mut s = Poly::zero();
    for r in residuals {
        s += r;
    }
    s.scale(&crate::exactmath::rat(2))
}

/// `d J / d x_m` for every mode.
fn state_derivatives(j: &PolyMatrix) -> Vec<PolyMatrix> {
    (1..=j.rows())
        .map(|m| j.map(|p| p.derivative(Var::state(m))))
        .collect()
}

/// Cyclic sum `sum_m A_im dB_jk/dx_m + A_jm dB_ki/dx_m + A_km dB_ij/dx_m`
/// for the given triple (0-based).
fn cyclic_term(a: &PolyMatrix, db: &[PolyMatrix], i: usize, j: usize, k: usize) -> Poly {
    let mut out = Poly::zero();
    for (m, d) in db.iter().enumerate() {
        for (u, v, w) in [(i, j, k), (j, k, i), (k, i, j)] {
            let x = a.get(u, m);
            let y = d.get(v, w);
            if !x.is_zero() && !y.is_zero() {
                out += &(x * y);
            }
        }
    }
    out
}

/// Residuals of the bilinear Jacobi expression `A` against `dB`.
pub(crate) fn bilinear_residuals(
    a: &PolyMatrix,
    b: &PolyMatrix,
) -> BTreeMap<(usize, usize, usize), Poly> {
    let m = a.rows();
    let db = state_derivatives(b);
    let mut out = BTreeMap::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let r = cyclic_term(a, &db, i, j, k);
                if !r.is_zero() {
                    out.insert((i + 1, j + 1, k + 1), r);
                }
            }
        }
    }
    out
}

/// Primitive, deduplicated parameter conditions from residual polynomials.
pub fn constraints_of<'a>(residuals: impl IntoIterator<Item = &'a Poly>) -> Vec<Poly> {
    let mut out: Vec<Poly> = Vec::new();
    for r in residuals {
        for coeff in r.split_state().into_values() {
            let c = coeff.primitive();
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

pub fn jacobi(j: &SkewPolyMatrix) -> JacobiReport {
    let residuals = bilinear_residuals(&j.matrix, &j.matrix);
    let constraint_polys = constraints_of(residuals.values());
    JacobiReport {
        contracted: contracted_of(residuals.values()),
        is_hamiltonian: residuals.is_empty(),
        residuals,
        constraint_polys,
        convention: J_CONVENTION,
    }
}

/// Casimirs of a model's `J`.
#[derive(Clone, Debug, PartialEq)]
pub struct CasimirSet {
    /// Basis of the nullspace of `J` over the field of rational functions.
    pub nullspace_basis: Vec<Vec<Poly>>,
    /// Whether each basis vector has a symmetric Jacobian.
    pub gradient_flags: Vec<bool>,
    /// Potentials of the gradient-flagged basis vectors.
    pub potentials: Vec<QuadraticForm>,
    /// Basis of all quadratic forms `C` with `J grad C = 0`.
    pub casimirs: Vec<QuadraticForm>,
    /// Number of functionally independent members of `casimirs`.
    pub count: usize,
    /// Set when the Jacobi identity fails; the forms are still conserved.
    pub advisory: bool,
}

pub fn is_gradient(v: &[Poly]) -> bool {
    pairs(v.len())
        .all(|(i, j)| v[i - 1].derivative(Var::state(j)) == v[j - 1].derivative(Var::state(i)))
}

/// Potential of a gradient field: `sum_d 1/(d+1) sum_i x_i v_i^(d)` where
/// `v_i^(d)` is the state-homogeneous part of degree `d`.
pub fn potential(v: &[Poly]) -> Poly {
    let mut out = Poly::zero();
    for (i, vi) in v.iter().enumerate() {
        let xi = Poly::var(Var::state(i + 1));
        for (mono, c) in vi.terms() {
            let d = mono.state_degree() as i64;
            let t = Poly::term(mono.clone(), c.clone()).scale(&crate::exactmath::ratio(1, d + 1));
            out += &(&xi * &t);
        }
    }
    out
}

fn normalize_form(q: &QuadraticForm) -> QuadraticForm {
    let mut u = q.unknowns();
    normalize_vector(&mut u);
    QuadraticForm::from_unknowns(q.modes, &u).expect("same size")
}

/// All quadratic forms whose gradient `J` annihilates, as a basis over the
/// parameter field.
pub fn quadratic_casimirs(j: &SkewPolyMatrix) -> Vec<QuadraticForm> {
    let m = j.modes();
    let n = unknown_count(m);
    let mut rows: BTreeMap<(usize, Monomial), Vec<Poly>> = BTreeMap::new();
    for col in 0..n {
        let mut unit = vec![Poly::zero(); n];
        unit[col] = Poly::one();
        let grad = QuadraticForm::from_unknowns(m, &unit)
            .expect("sized")
            .gradient();
        let image = j.matrix.mul_vec(&grad).expect("sized");
        for (i, comp) in image.iter().enumerate() {
            for (mono, coeff) in comp.split_state() {
                rows.entry((i, mono))
                    .or_insert_with(|| vec![Poly::zero(); n])[col] = coeff;
            }
        }
    }
    let matrix = PolyMatrix::from_rows(n, rows.into_values().collect()).expect("uniform");
    nullspace_symbolic(&matrix)
        .into_iter()
        .map(|v| normalize_form(&QuadraticForm::from_unknowns(m, &v).expect("sized")))
        .collect()
}

/// Functional rank of forms with parameter-polynomial coefficients: rank of
/// their gradients at random parameter and state points, maximised over
/// the default number of trials.
pub fn functional_rank(forms: &[QuadraticForm], modes: usize, seed: u64) -> usize {
    if forms.is_empty() {
        return 0;
    }
    let grads: Vec<Vec<Poly>> = forms.iter().map(QuadraticForm::gradient).collect();
    let mut vars: Vec<Var> = grads
        .iter()
        .flatten()
        .flat_map(Poly::vars)
        .filter(|v| !v.is_state())
        .collect();
    vars.extend((1..=modes).map(Var::state));
    vars.sort();
    vars.dedup();
    let mut rng = seeded_rng(seed);
    let mut best = 0;
    for _ in 0..DEFAULT_TRIALS {
        let point = random_assignment(vars.iter().copied(), &mut rng);
        let rows: Vec<Vec<Rational>> = grads
            .iter()
            .map(|g| {
                g.iter()
                    .map(|p| p.eval(&point).expect("all assigned"))
                    .collect()
            })
            .collect();
        best = best.max(rational_rank(&rows, modes));
    }
    best
}

/// Casimir analysis of `g`.
pub fn casimirs(g: &Glom, seed: u64) -> Result<CasimirSet> {
    let j = build_j(g)?;
    casimirs_of(&j, seed)
}

pub fn casimirs_of(j: &SkewPolyMatrix, seed: u64) -> Result<CasimirSet> {
    let m = j.modes();
    let advisory = !jacobi(j).is_hamiltonian;
    let nullspace_basis = nullspace_symbolic(&j.matrix);
    let gradient_flags: Vec<bool> = nullspace_basis.iter().map(|v| is_gradient(v)).collect();
    let mut potentials = Vec::new();
    for (v, &flag) in nullspace_basis.iter().zip(&gradient_flags) {
        if flag {
            if let Ok(q) = QuadraticForm::from_poly(m, &potential(v)) {
                potentials.push(normalize_form(&q));
            }
        }
    }
    let casimirs = quadratic_casimirs(j);
    let count = functional_rank(&casimirs, m, seed);
    Ok(CasimirSet {
        nullspace_basis,
        gradient_flags,
        potentials,
        casimirs,
        count,
        advisory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::proportional;
    use crate::glom::{builtin_model, Gyrostat};

    fn v(name: &str) -> Poly {
        Poly::var(Var::parse(name).unwrap())
    }
    fn x(i: usize) -> Poly {
        Poly::var(Var::state(i))
    }

    #[test]
    fn single_gyrostat_matrix_by_hand() {
        let g = builtin_model("gyrostat").unwrap();
        let j = build_j(&g).unwrap();
        assert_eq!(*j.entry(1, 2), -v("c1"));
        assert_eq!(*j.entry(1, 3), &(&v("p1") * &x(2)) + &v("b1"));
        assert_eq!(*j.entry(2, 3), &(&v("q1") * &x(1)) - &v("a1"));
        assert_eq!(*j.entry(3, 2), &v("a1") - &(&v("q1") * &x(1)));
        assert!(jacobi(&j).is_hamiltonian);
    }

    fn scalar(text: &str) -> Poly {
        // sums of products like "2*p1*p2*x2"
        let mut out = Poly::zero();
        for term in text.split('+') {
            let mut t = Poly::one();
            for f in term.trim().split('*') {
                t = match f.trim().parse::<i64>() {
                    Ok(n) => t.scale(&crate::exactmath::rat(n)),
                    Err(_) => match f.trim().strip_prefix('x') {
                        Some(i) => &t * &x(i.parse().unwrap()),
                        None if f.trim().starts_with('-') => {
                            (&t * &v(&f.trim()[1..])).scale(&crate::exactmath::rat(-1))
                        }
                        None => &t * &v(f.trim()),
                    },
                };
            }
            out += &t;
        }
        out
    }

    #[test]
    fn contracted_scalars_match_printed_conditions() {
        let cases = [
            (
                "model1",
                "2*p1*p2*x2 + -2*p1*p2*x3 + 2*p2*b1 + -2*p1*b2 + -2*q2*c1",
            ),
            ("model2", "2*q2*b1 + -2*q2*a1 + 2*q2*p1*x2 + 2*q2*q1*x1"),
            (
                "model3",
                "2*p1*a3 + -2*p1*q3*x1 + -2*p2*a3 + 2*p2*q3*x1 + -2*p3*a1 + 2*p3*q1*x1 \
                 + -2*q2*a1 + 2*q2*q1*x1 + 2*p2*b3 + 2*p2*p3*x2 + -2*q1*b3 + -2*q1*p3*x2 \
                 + 2*q2*b1 + 2*q2*p1*x2 + 2*q3*b1 + 2*q3*p1*x2",
            ),
        ];
        for (name, text) in cases {
            let j = build_j(&builtin_model(name).unwrap()).unwrap();
            let report = jacobi(&j);
            assert!(!report.is_hamiltonian);
            assert_eq!(report.contracted, scalar(&text.replace('\\', "")), "{name}");
        }
    }

    #[test]
    fn model2_conditions_are_q2_times_linear_factor() {
        let j = build_j(&builtin_model("model2").unwrap()).unwrap();
        let report = jacobi(&j);
        // the per-triple split is finer than the printed scalar, but every
        // condition is a multiple of q2 and q2 = 0 clears them all
        assert!(!report.constraint_polys.is_empty());
        for c in &report.constraint_polys {
            assert!(c.div_exact(&v("q2")).is_some(), "{c}");
        }
        let ham = build_j(&builtin_model("model2-hamiltonian").unwrap()).unwrap();
        assert!(jacobi(&ham).is_hamiltonian);
    }

    #[test]
    fn contracted_scalar_can_hide_failing_triples() {
        let j = build_j(&builtin_model("model3-hamiltonian").unwrap()).unwrap();
        let report = jacobi(&j);
        assert!(report.contracted_diverges());
        // J_13 dJ_45/dx_3 is the only surviving product for this triple;
        // the branch writes p1 as q1
        let r = &report.residuals[&(1, 4, 5)];
        assert_eq!(*r, &v("q2") * &(&(&v("q1") * &x(2)) + &v("b1")));
    }

    #[test]
    fn no_gyrostats_give_zero_matrix() {
        let g = Glom::new(3, vec![]).unwrap();
        assert!(build_j(&g).unwrap().matrix.is_zero());
    }

    #[test]
    fn energy_violation_refused() {
        let bad = Gyrostat {
            r: Some(crate::glom::ParamSpec::exact(1)),
            p: crate::glom::ParamSpec::exact(1),
            q: crate::glom::ParamSpec::exact(1),
            ..Gyrostat::nonlinear([1, 2, 3])
        };
        let g = Glom::new(3, vec![bad]).unwrap();
        assert!(matches!(build_j(&g), Err(Error::Energy(_))));
    }

    #[test]
    fn single_gyrostat_casimir() {
        let g = builtin_model("gyrostat").unwrap();
        let cs = casimirs(&g, 0).unwrap();
        assert_eq!(cs.count, 1);
        assert_eq!(cs.nullspace_basis.len(), 1);
        assert!(cs.gradient_flags[0]);
        let expected = vec![
            &v("a1") - &(&v("q1") * &x(1)),
            &v("b1") + &(&v("p1") * &x(2)),
            v("c1"),
        ];
        assert!(proportional(&cs.nullspace_basis[0], &expected).unwrap());
        assert!(proportional(&cs.casimirs[0].gradient(), &expected).unwrap());
    }

    #[test]
    fn potential_integrates_affine_gradient() {
        let grad = vec![&v("a1") - &(&v("q1") * &x(1)), v("c1")];
        let p = potential(&grad);
        assert_eq!(p.derivative(Var::state(1)), grad[0]);
        assert_eq!(p.derivative(Var::state(2)), grad[1]);
    }
}
