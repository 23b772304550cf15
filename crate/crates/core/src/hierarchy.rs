//! Families of models grown one gyrostat at a time, the extra Jacobi
//! conditions each new gyrostat brings, and how Casimirs of consecutive
//! members relate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactmath::poly::normalize_vector;
use crate::exactmath::{proportional, rat, Poly, Var};
use crate::glom::{Glom, Gyrostat, ParamSpec};
use crate::hamiltonian::{
    bilinear_residuals, build_j, casimirs_of, constraints_of, gyrostat_block, jacobi, CasimirSet,
    JacobiReport,
};

type Triple = (usize, usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Sparse,
    Dense1,
    Dense2,
    Model4,
    Model5,
}

const MODEL4_TRIPLES: [[usize; 3]; 3] = [[1, 2, 3], [1, 4, 5], [1, 6, 7]];
const MODEL5_TRIPLES: [[usize; 3]; 5] = [[1, 2, 3], [1, 4, 5], [6, 7, 8], [3, 4, 7], [2, 5, 7]];

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Sparse,
        Family::Dense1,
        Family::Dense2,
        Family::Model4,
        Family::Model5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sparse => "sparse",
            Family::Dense1 => "dense1",
            Family::Dense2 => "dense2",
            Family::Model4 => "model4",
            Family::Model5 => "model5",
        }
    }

    /// Largest member of a coupled family.
    pub fn cap(self) -> Option<usize> {
        match self {
            Family::Model4 => Some(3),
            Family::Model5 => Some(5),
            _ => None,
        }
    }

    /// Mode triple of gyrostat `k`.
    pub fn triple(self, k: usize) -> [usize; 3] {
        match self {
            Family::Sparse => [2 * k - 1, 2 * k, 2 * k + 1],
            Family::Dense1 | Family::Dense2 => [k, k + 1, k + 2],
            Family::Model4 => MODEL4_TRIPLES[k - 1],
            Family::Model5 => MODEL5_TRIPLES[k - 1],
        }
    }

    /// Modes of the `K`-gyrostat member: the largest mode referenced.
    pub fn modes(self, k: usize) -> usize {
        (1..=k).flat_map(|j| self.triple(j)).max().unwrap_or(0)
    }

    /// Mode offset between consecutive gyrostats of a nested family.
    pub fn stride(self) -> Option<usize> {
        match self {
            Family::Sparse => Some(2),
            Family::Dense1 | Family::Dense2 => Some(1),
            _ => None,
        }
    }

    /// First `K` whose incremental condition already has the shape that
    /// repeats. A dense gyrostat touches the two before it, so `K = 2` is
    /// still short of one neighbour.
    pub fn recurrence_start(self) -> usize {
        match self {
            Family::Dense1 | Family::Dense2 => 3,
            _ => 2,
        }
    }

    fn check_k(self, k_max: usize) -> Result<()> {
        if k_max < 1 {
            return Err(Error::Contract("a hierarchy needs K >= 1".into()));
        }
        if let Some(cap) = self.cap() {
            if k_max > cap {
                return Err(Error::Contract(format!(
                    "{} has at most {cap} gyrostats, asked for {k_max}",
                    self.name()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownModel(format!("unknown hierarchy family {s:?}")))
    }
}

/// When a constraint starts to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Every constraint on a gyrostat applies as soon as that gyrostat is
    /// present, so each member is a truncation of the largest one.
    Final,
    /// A constraint applies from the member that introduced it, possibly
    /// reaching back to earlier gyrostats.
    Cumulative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub param: Var,
    pub value: ParamSpec,
    pub introduced_at: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchySpec {
    pub family: Family,
    pub k_max: usize,
    pub constraints: Vec<Constraint>,
    pub schedule: Schedule,
}

fn param(name: &str) -> Var {
    Var::parse(name).expect("built-in parameter name")
}

impl HierarchySpec {
    pub fn unconstrained(family: Family, k_max: usize) -> Result<Self> {
        family.check_k(k_max)?;
        Ok(HierarchySpec {
            family,
            k_max,
            constraints: Vec::new(),
            schedule: Schedule::Final,
        })
    }

    /// Constraint sets under which each family is Hamiltonian.
    pub fn builtin(family: Family, k_max: usize) -> Result<Self> {
        let mut spec = Self::unconstrained(family, k_max)?;
        let mut add = |name: String, value: ParamSpec, at: usize| {
            spec.constraints.push(Constraint {
                param: param(&name),
                value,
                introduced_at: at,
            })
        };
        let link = |f: i64, name: String| ParamSpec::link(rat(f), param(&name));
        match family {
            Family::Sparse => {
                for k in 2..=k_max {
                    add(format!("q{k}"), ParamSpec::Zero, k);
                }
            }
            Family::Dense1 | Family::Dense2 => {
                let parity = if family == Family::Dense1 { 0 } else { 1 };
                for k in 1..=k_max {
                    if k >= 2 {
                        add(format!("q{k}"), ParamSpec::Zero, k);
                    }
                    if k % 2 == parity {
                        add(format!("p{k}"), ParamSpec::Zero, k);
                        add(format!("b{k}"), ParamSpec::Zero, k);
                    }
                }
            }
            Family::Model4 => {
                for k in 2..=k_max {
                    add(format!("p{k}"), ParamSpec::Zero, k);
                    add(format!("q{k}"), ParamSpec::Zero, k);
                    add(format!("c{k}"), link(1, format!("b{k}")), k);
                }
            }
            Family::Model5 => {
                let table: [(&str, ParamSpec, usize); 13] = [
                    ("q1", ParamSpec::Zero, 2),
                    ("q2", ParamSpec::Zero, 2),
                    ("b4", link(1, "a4".into()), 4),
                    ("c4", link(-1, "a4".into()), 4),
                    ("c2", link(-1, "a2".into()), 4),
                    ("b1", link(1, "a1".into()), 4),
                    ("p3", ParamSpec::Zero, 4),
                    ("q4", ParamSpec::Zero, 4),
                    ("b5", link(1, "a5".into()), 5),
                    ("c5", link(1, "a5".into()), 5),
                    ("b2", link(-1, "a2".into()), 5),
                    ("c1", link(1, "a1".into()), 5),
                    ("p5", ParamSpec::Zero, 5),
                ];
                for (name, value, at) in table {
                    add(name.to_string(), value, at);
                }
            }
        }
        Ok(spec)
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    fn applies(&self, c: &Constraint, k: usize) -> bool {
        let gyrostat = c.param.as_param().map_or(usize::MAX, |(_, g)| g);
        match self.schedule {
            Schedule::Final => gyrostat <= k,
            Schedule::Cumulative => c.introduced_at <= k,
        }
    }

    /// The `K`-gyrostat member under this spec.
    pub fn member(&self, k: usize) -> Result<Glom> {
        if k < 1 || k > self.k_max {
            return Err(Error::Contract(format!(
                "member {k} outside 1..={}",
                self.k_max
            )));
        }
        let mut gs: Vec<Gyrostat> = (1..=k)
            .map(|j| Gyrostat::generic(self.family.triple(j)))
            .collect();
        for c in self.constraints.iter().filter(|c| self.applies(c, k)) {
            let (kind, g) = c
                .param
                .as_param()
                .ok_or_else(|| Error::Contract(format!("{} is not a parameter", c.param)))?;
            if g > k {
                continue;
            }
            gs[g - 1].set(kind, c.value.clone());
        }
        Glom::new(self.family.modes(k), gs)
    }
}

/// Members `K = 1..=K_max`.
pub fn generate(spec: &HierarchySpec) -> Result<Vec<Glom>> {
    spec.family.check_k(spec.k_max)?;
    (1..=spec.k_max).map(|k| spec.member(k)).collect()
}

/// Jacobi terms that appear when a gyrostat is appended.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementalCondition {
    /// Nonzero cross-term residuals keyed by 1-based triple.
    pub residuals: BTreeMap<Triple, Poly>,
    pub constraints: Vec<Poly>,
}

impl IncrementalCondition {
    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    /// Sum of the residuals, the single-scalar form of the condition.
    pub fn combined(&self) -> Poly {
        let mut s = Poly::zero();
        for r in self.residuals.values() {
            s += r;
        }
        s
    }
}

fn is_extension(big: &Glom, small: &Glom) -> bool {
    big.k() == small.k() + 1
        && big.modes() >= small.modes()
        && big.gyrostats()[..small.k()] == *small.gyrostats()
}

/// Cross terms between the appended gyrostat and the earlier ones. Checked
/// against the difference of the full residual sets.
pub fn incremental_jacobi(big: &Glom, small: &Glom) -> Result<IncrementalCondition> {
    if !is_extension(big, small) {
        return Err(Error::Contract(
            "the larger model must equal the smaller one plus one appended gyrostat".into(),
        ));
    }
    let m = big.modes();
    let new = gyrostat_block(big, big.k());
    let mut old = crate::exactmath::PolyMatrix::zeros(m, m);
    for k in 1..big.k() {
        let b = gyrostat_block(big, k);
        for i in 0..m {
            for j in 0..m {
                old.add_to(i, j, b.get(i, j));
            }
        }
    }
    let mut residuals = bilinear_residuals(&old, &new);
    for (t, r) in bilinear_residuals(&new, &old) {
        let e = residuals.entry(t).or_insert_with(Poly::zero);
        *e += &r;
    }
    residuals.retain(|_, r| !r.is_zero());

    let full_big = jacobi(&build_j(big)?).residuals;
    let full_small = jacobi(&build_j(small)?).residuals;
    let mut diff = full_big;
    for (t, r) in full_small {
        let e = diff.entry(t).or_insert_with(Poly::zero);
        *e -= &r;
    }
    diff.retain(|_, r| !r.is_zero());
    if diff != residuals {
        return Err(Error::Inconsistent(
            "cross terms differ from the difference of full residuals".into(),
        ));
    }
    let constraints = constraints_of(residuals.values());
    Ok(IncrementalCondition {
        residuals,
        constraints,
    })
}

/// Gyrostat `k -> k + 1`, mode `i -> i + stride`.
fn shift_var(v: Var, stride: usize) -> Var {
    match (v.state_index(), v.as_param()) {
        (Some(i), _) => Var::state(i + stride),
        (None, Some((kind, k))) => Var::param(kind, k + 1),
        _ => v,
    }
}

fn shifted(c: &IncrementalCondition, stride: usize) -> BTreeMap<Triple, Poly> {
    c.residuals
        .iter()
        .map(|(&(i, j, k), p)| {
            (
                (i + stride, j + stride, k + stride),
                p.rename(&|v| shift_var(v, stride)),
            )
        })
        .collect()
}

/// Incremental conditions of the unconstrained family members `2..=K_max`.
pub fn incremental_conditions(family: Family, k_max: usize) -> Result<Vec<IncrementalCondition>> {
    let spec = HierarchySpec::unconstrained(family, k_max)?;
    let members = generate(&spec)?;
    members
        .par_windows(2)
        .map(|w| incremental_jacobi(&w[1], &w[0]))
        .collect()
}

/// Whether the incremental condition of each unconstrained member from
/// [`Family::recurrence_start`] on is the previous one with indices
/// shifted. Families without a fixed stride are tested against every
/// stride up to the mode count.
pub fn check_recurrence(family: Family, k_max: usize) -> Result<bool> {
    if k_max < 3 {
        return Err(Error::Contract("recurrence needs K_max >= 3".into()));
    }
    let conds = incremental_conditions(family, k_max)?;
    // conds[i] belongs to K = i + 2
    let start = family.recurrence_start() - 2;
    let pairs: Vec<(&IncrementalCondition, &IncrementalCondition)> = conds
        .iter()
        .skip(start)
        .zip(conds.iter().skip(start + 1))
        .collect();
    let strides: Vec<usize> = match family.stride() {
        Some(s) => vec![s],
        None => (0..=family.modes(k_max)).collect(),
    };
    Ok(strides.into_iter().any(|s| {
        pairs
            .iter()
            .all(|(a, b)| !a.is_empty() && shifted(a, s) == b.residuals)
    }))
}

/// Restricts `big` to the first `small.len()` coordinates, drops common
/// monomial factors, sets `absent` parameters to zero, and compares with
/// `small` up to a rational-function multiple.
pub fn projection_consistency(big: &[Poly], small: &[Poly], absent: &BTreeSet<Var>) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut v = big[..small.len()].to_vec();
    normalize_vector(&mut v);
    let zeros: BTreeMap<Var, crate::exactmath::Rational> = absent
        .iter()
        .map(|&a| (a, crate::exactmath::rat(0)))
        .collect();
    let v: Vec<Poly> = v.iter().map(|p| p.substitute_values(&zeros)).collect();
    if v.iter().all(Poly::is_zero) {
        return small.iter().all(Poly::is_zero);
    }
    proportional(&v, small).unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemberReport {
    pub k: usize,
    pub modes: usize,
    pub model: Glom,
    pub jacobi: JacobiReport,
    /// Against the member's own truncation to `K - 1` gyrostats; empty at
    /// `K = 1`.
    pub incremental: IncrementalCondition,
    pub casimirs: CasimirSet,
    /// Against the nearest earlier member that has Casimirs. `None` when
    /// either side has none.
    pub projection_consistency: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyReport {
    pub family: Family,
    pub schedule: Schedule,
    pub members: Vec<MemberReport>,
}

impl HierarchyReport {
    pub fn casimir_counts(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.casimirs.count).collect()
    }
}

fn params_of_gyrostats(from: usize, to: usize) -> BTreeSet<Var> {
    use crate::exactmath::ParamKind;
    (from..=to)
        .flat_map(|k| {
            ParamKind::ALL
                .into_iter()
                .map(move |kind| Var::param(kind, k))
        })
        .collect()
}

fn member_report(g: Glom, seed: u64) -> Result<MemberReport> {
    let j = build_j(&g)?;
    let jac = jacobi(&j);
    let incremental = if g.k() > 1 {
        let prev_modes = (1..g.k())
            .flat_map(|k| g.gyrostats()[k - 1].modes)
            .max()
            .unwrap_or(0);
        incremental_jacobi(&g, &g.truncated(g.k() - 1, prev_modes)?)?
    } else {
        IncrementalCondition {
            residuals: BTreeMap::new(),
            constraints: Vec::new(),
        }
    };
    let casimirs = casimirs_of(&j, seed)?;
    Ok(MemberReport {
        k: g.k(),
        modes: g.modes(),
        model: g,
        jacobi: jac,
        incremental,
        casimirs,
        projection_consistency: None,
    })
}

pub fn hierarchy_report(spec: &HierarchySpec, seed: u64) -> Result<HierarchyReport> {
    let members = generate(spec)?;
    let mut reports = members
        .into_par_iter()
        .map(|g| member_report(g, seed))
        .collect::<Result<Vec<_>>>()?;
    for idx in 1..reports.len() {
        let Some(prev) = (0..idx).rev().find(|&i| reports[i].casimirs.count > 0) else {
            continue;
        };
        if reports[idx].casimirs.count == 0 {
            continue;
        }
        let absent = params_of_gyrostats(reports[prev].k + 1, reports[idx].k);
        let big: Vec<Vec<Poly>> = reports[idx]
            .casimirs
            .casimirs
            .iter()
            .map(|c| c.gradient())
            .collect();
        let ok = reports[prev].casimirs.casimirs.iter().all(|c| {
            let small = c.gradient();
            big.iter()
                .any(|b| projection_consistency(b, &small, &absent))
        });
        reports[idx].projection_consistency = Some(ok);
    }
    Ok(HierarchyReport {
        family: spec.family,
        schedule: spec.schedule,
        members: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glom::builtin_model;

    fn v(name: &str) -> Poly {
        Poly::var(param(name))
    }
    fn x(i: usize) -> Poly {
        Poly::var(Var::state(i))
    }

    #[test]
    fn sparse_member_with_q2_zero_is_the_hamiltonian_model2() {
        let spec = HierarchySpec::builtin(Family::Sparse, 2).unwrap();
        let members = generate(&spec).unwrap();
        let expected = builtin_model("model2-hamiltonian").unwrap();
        assert_eq!(members[1].assemble_field(), expected.assemble_field());
        assert_eq!(members[0].k(), 1);
        assert_eq!(members[0].modes(), 3);
    }

    #[test]
    fn dense_member_three_has_five_modes() {
        let spec = HierarchySpec::unconstrained(Family::Dense1, 3).unwrap();
        let g = spec.member(3).unwrap();
        assert_eq!(g.modes(), 5);
        assert_eq!(
            g.assemble_field(),
            builtin_model("dense(3)").unwrap().assemble_field()
        );
    }

    #[test]
    fn coupled_families_are_capped() {
        assert!(HierarchySpec::builtin(Family::Model4, 4).is_err());
        assert!(HierarchySpec::builtin(Family::Model5, 6).is_err());
        assert!(HierarchySpec::builtin(Family::Sparse, 0).is_err());
    }

    #[test]
    fn final_model5_member_is_the_hamiltonian_model5() {
        let spec = HierarchySpec::builtin(Family::Model5, 5).unwrap();
        let g = spec.member(5).unwrap();
        assert_eq!(
            g.assemble_field(),
            builtin_model("model5-hamiltonian")
                .unwrap()
                .assemble_field()
        );
        let cumulative = spec.clone().with_schedule(Schedule::Cumulative);
        assert_eq!(
            cumulative.member(5).unwrap().assemble_field(),
            g.assemble_field()
        );
        // K = 1 differs: the cumulative schedule has not linked b1, c1 yet
        assert_ne!(
            cumulative.member(1).unwrap().assemble_field(),
            spec.member(1).unwrap().assemble_field()
        );
    }

    #[test]
    fn sparse_incremental_condition_two() {
        let conds = incremental_conditions(Family::Sparse, 2).unwrap();
        let expected =
            &v("q2") * &(&(&(&(&v("q1") * &x(1)) + &(&v("p1") * &x(2))) + &v("b1")) - &v("a1"));
        // residuals live on different triples; their sum is the condition
        assert!(conds[0]
            .combined()
            .rational_multiple_of(&expected)
            .is_some());
    }

    #[test]
    fn not_an_extension_is_refused() {
        let a = builtin_model("model1").unwrap();
        let b = builtin_model("model2").unwrap();
        assert!(matches!(
            incremental_jacobi(&b, &a),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn identical_vectors_project_consistently() {
        let g = vec![&v("a1") - &(&v("q1") * &x(1)), v("c1")];
        assert!(projection_consistency(&g, &g, &BTreeSet::new()));
    }
}
