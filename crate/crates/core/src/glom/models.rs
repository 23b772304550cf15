//! Built-in models and named parameter specializations.

use crate::error::{Error, Result};
use crate::exactmath::{rat, ratio, Var};

use super::{Glom, Gyrostat, ParamSpec};

fn var(name: &str) -> Var {
    Var::parse(name).expect("valid parameter name")
}

fn link(factor: i64, name: &str) -> ParamSpec {
    ParamSpec::link(rat(factor), var(name))
}

fn generic_model(modes: usize, triples: &[[usize; 3]]) -> Glom {
    let gs = triples.iter().map(|&t| Gyrostat::generic(t)).collect();
    Glom::new(modes, gs).expect("built-in triples are valid")
}

/// Sparse chain: gyrostat `k` on modes `(2k-1, 2k, 2k+1)`, `M = 2K+1`.
pub fn sparse(k: usize) -> Result<Glom> {
    if k < 1 {
        return Err(Error::Contract("sparse model needs K >= 1".into()));
    }
    let triples: Vec<_> = (1..=k).map(|j| [2 * j - 1, 2 * j, 2 * j + 1]).collect();
    Ok(generic_model(2 * k + 1, &triples))
}

/// Dense chain: gyrostat `k` on modes `(k, k+1, k+2)`, `M = K+2`.
pub fn dense(k: usize) -> Result<Glom> {
    if k < 1 {
        return Err(Error::Contract("dense model needs K >= 1".into()));
    }
    let triples: Vec<_> = (1..=k).map(|j| [j, j + 1, j + 2]).collect();
    Ok(generic_model(k + 2, &triples))
}

fn model1() -> Glom {
    generic_model(4, &[[1, 2, 3], [2, 3, 4]])
}

fn model2() -> Glom {
    generic_model(5, &[[1, 2, 3], [3, 4, 5]])
}

fn model3() -> Glom {
    generic_model(5, &[[1, 2, 3], [3, 4, 5], [1, 2, 4]])
}

fn model4() -> Glom {
    generic_model(7, &[[1, 2, 3], [1, 4, 5], [1, 6, 7]])
}

fn model5() -> Glom {
    generic_model(8, &[[1, 2, 3], [1, 4, 5], [6, 7, 8], [3, 4, 7], [2, 5, 7]])
}

/// Two-dimensional convection core: gyrostat `k` has `q_k = d_k` free,
/// `p_k = -d_k`, `a_k = d_k`, no `b`, `c`.
fn model4_convection() -> Glom {
    let gs = [[1, 2, 3], [1, 4, 5], [1, 6, 7]]
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let q = format!("q{}", i + 1);
            Gyrostat {
                a: link(1, &q),
                p: link(-1, &q),
                ..Gyrostat::nonlinear(t)
            }
        })
        .collect();
    Glom::new(7, gs).expect("valid")
}

/// Three-dimensional convection core with `q3 = 2 beta` free.
fn model5_convection() -> Glom {
    let fixed = |t, p: (i64, i64), q: (i64, i64), a: (i64, i64)| Gyrostat {
        a: ParamSpec::Exact(ratio(a.0, a.1)),
        p: ParamSpec::Exact(ratio(p.0, p.1)),
        q: ParamSpec::Exact(ratio(q.0, q.1)),
        ..Gyrostat::nonlinear(t)
    };
    let gs = vec![
        fixed([1, 2, 3], (-1, 1), (1, 1), (1, 1)),
        fixed([1, 4, 5], (-1, 1), (1, 1), (1, 1)),
        Gyrostat {
            a: ParamSpec::link(ratio(1, 2), var("q3")),
            p: link(-1, "q3"),
            ..Gyrostat::nonlinear([6, 7, 8])
        },
        fixed([3, 4, 7], (0, 1), (-1, 2), (0, 1)),
        fixed([2, 5, 7], (-1, 2), (0, 1), (0, 1)),
    ];
    Glom::new(8, gs).expect("valid")
}

/// Coupled three-gyrostat hierarchy endpoint with `p = q = 0`, `c = b`
/// for the second and third gyrostats.
fn model4_hamiltonian() -> Glom {
    let mut gs = model4().gyrostats().to_vec();
    for k in 2..=3 {
        let g = &mut gs[k - 1];
        g.p = ParamSpec::Zero;
        g.q = ParamSpec::Zero;
        g.c = link(1, &format!("b{k}"));
    }
    Glom::new(7, gs).expect("valid")
}

/// Fully coupled five-gyrostat model satisfying the Jacobi identity.
fn model5_hamiltonian() -> Glom {
    let mut gs = model5().gyrostats().to_vec();
    let set = |gs: &mut Vec<Gyrostat>, name: &str, spec: ParamSpec| {
        let (kind, k) = var(name).as_param().unwrap();
        gs[k - 1].set(kind, spec);
    };
    set(&mut gs, "q1", ParamSpec::Zero);
    set(&mut gs, "b1", link(1, "a1"));
    set(&mut gs, "c1", link(1, "a1"));
    set(&mut gs, "q2", ParamSpec::Zero);
    set(&mut gs, "b2", link(-1, "a2"));
    set(&mut gs, "c2", link(-1, "a2"));
    set(&mut gs, "p3", ParamSpec::Zero);
    set(&mut gs, "q4", ParamSpec::Zero);
    set(&mut gs, "b4", link(1, "a4"));
    set(&mut gs, "c4", link(-1, "a4"));
    set(&mut gs, "p5", ParamSpec::Zero);
    set(&mut gs, "b5", link(1, "a5"));
    set(&mut gs, "c5", link(1, "a5"));
    Glom::new(8, gs).expect("valid")
}

fn model3_hamiltonian() -> Glom {
    let mut gs = model3().gyrostats().to_vec();
    gs[0].p = link(1, "q1");
    gs[1].p = link(1, "q1");
    gs[2].p = link(-1, "q2");
    gs[2].q = link(-1, "q2");
    Glom::new(5, gs).expect("valid")
}

fn zeroed(g: Glom, names: &[&str]) -> Glom {
    g.with_zero_names(names).expect("valid names")
}

/// Names accepted by [`builtin_model`], besides `sparse(K)` / `dense(K)`.
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "euler",
        "gyrostat",
        "model1",
        "model1-nlf",
        "model1-ham-a",
        "model1-ham-b",
        "model1-two-invariants",
        "model1-energy-only",
        "model2",
        "model2-nlf",
        "model2-hamiltonian",
        "model3",
        "model3-nlf",
        "model3-hamiltonian",
        "model4",
        "model4-convection",
        "model4-hamiltonian",
        "model5",
        "model5-convection",
        "model5-hamiltonian",
    ]
}

fn parse_sized(name: &str, prefix: &str) -> Option<Result<usize>> {
    let rest = name.strip_prefix(prefix)?;
    let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')'))?;
    Some(
        inner
            .parse::<usize>()
            .map_err(|_| Error::UnknownModel(name.to_string())),
    )
}

/// Looks up a built-in model.
///
/// * `euler`: single gyrostat with no linear terms.
/// * `gyrostat`: single fully generic gyrostat.
/// * `model1`..`model5`: fully generic coupled models; `-nlf` variants drop
///   all linear feedbacks.
/// * `model1-ham-a`: `p1 = b1 = c1 = 0`, so `x1` is frozen.
/// * `model1-ham-b`: `p2 = c1 = b2 = 0`.
/// * `model1-two-invariants`: `b1 = a2 = 0`; `model1-energy-only`:
///   `b1 = b2 = 0`.
/// * `model2-hamiltonian`: `q2 = 0`.
/// * `model3-hamiltonian`: `p1 = p2 = q1`, `p3 = q3 = -q2`.
/// * `model4-convection`, `model5-convection`: convection cores with the
///   physical coefficient pattern.
/// * `model4-hamiltonian`, `model5-hamiltonian`: endpoints of the coupled
///   Hamiltonian hierarchies.
/// * `sparse(K)`, `dense(K)`: nested chains of `K` generic gyrostats.
pub fn builtin_model(name: &str) -> Result<Glom> {
    if let Some(k) = parse_sized(name, "sparse") {
        return sparse(k?);
    }
    if let Some(k) = parse_sized(name, "dense") {
        return dense(k?);
    }
    Ok(match name {
        "euler" => Glom::new(3, vec![Gyrostat::nonlinear([1, 2, 3])]).expect("valid"),
        "gyrostat" => generic_model(3, &[[1, 2, 3]]),
        "model1" => model1(),
        "model1-nlf" => model1().without_linear_feedback(),
        "model1-ham-a" => zeroed(model1(), &["p1", "b1", "c1"]),
        "model1-ham-b" => zeroed(model1(), &["p2", "c1", "b2"]),
        "model1-two-invariants" => zeroed(model1(), &["b1", "a2"]),
        "model1-energy-only" => zeroed(model1(), &["b1", "b2"]),
        "model2" => model2(),
        "model2-nlf" => model2().without_linear_feedback(),
        "model2-hamiltonian" => zeroed(model2(), &["q2"]),
        "model3" => model3(),
        "model3-nlf" => model3().without_linear_feedback(),
        "model3-hamiltonian" => model3_hamiltonian(),
        "model4" => model4(),
        "model4-convection" => model4_convection(),
        "model4-hamiltonian" => model4_hamiltonian(),
        "model5" => model5(),
        "model5-convection" => model5_convection(),
        "model5-hamiltonian" => model5_hamiltonian(),
        _ => return Err(Error::UnknownModel(name.to_string())),
    })
}

/// Specs of gyrostat `k`, for tests that pin specific coefficients.
#[cfg(test)]
pub(crate) fn spec_of(g: &Glom, name: &str) -> ParamSpec {
    use crate::exactmath::ParamKind;
    let (kind, k) = var(name).as_param().unwrap();
    if kind == ParamKind::R {
        return g.gyrostats()[k - 1].r.clone().unwrap_or(ParamSpec::Generic);
    }
    g.gyrostats()[k - 1].spec(kind).unwrap().clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::Poly;

    fn x(i: usize) -> Poly {
        Poly::var(Var::state(i))
    }
    fn v(name: &str) -> Poly {
        Poly::var(var(name))
    }
    fn c(n: i64, d: i64) -> Poly {
        Poly::constant(ratio(n, d))
    }

    #[test]
    fn model3_layout() {
        let g = builtin_model("model3").unwrap();
        assert_eq!(g.modes(), 5);
        let triples: Vec<_> = g.gyrostats().iter().map(|g| g.modes).collect();
        assert_eq!(triples, vec![[1, 2, 3], [3, 4, 5], [1, 2, 4]]);
    }

    #[test]
    fn sized_names() {
        assert_eq!(builtin_model("sparse(1)").unwrap().modes(), 3);
        assert_eq!(builtin_model("sparse(3)").unwrap().modes(), 7);
        assert_eq!(builtin_model("dense(3)").unwrap().modes(), 5);
        assert!(builtin_model("sparse(0)").is_err());
        assert!(matches!(
            builtin_model("model9"),
            Err(Error::UnknownModel(_))
        ));
    }

    #[test]
    fn every_builtin_conserves_energy() {
        for name in builtin_names() {
            let g = builtin_model(name).unwrap();
            assert!(g.check_energy().ok, "{name}");
        }
    }

    #[test]
    fn model1_field_term_by_term() {
        let f = builtin_model("model1").unwrap().assemble_field();
        let r = |k: &str, l: &str| -&(&v(k) + &v(l));
        let expected = [
            &(&(&v("p1") * &x(2)) * &x(3)) + &(&(&v("b1") * &x(3)) - &(&v("c1") * &x(2))),
            &(&(&(&v("q1") * &x(3)) * &x(1)) + &(&(&v("c1") * &x(1)) - &(&v("a1") * &x(3))))
                + &(&(&(&v("p2") * &x(3)) * &x(4)) + &(&(&v("b2") * &x(4)) - &(&v("c2") * &x(3)))),
            &(&(&(&r("p1", "q1") * &x(1)) * &x(2)) + &(&(&v("a1") * &x(2)) - &(&v("b1") * &x(1))))
                + &(&(&(&v("q2") * &x(4)) * &x(2)) + &(&(&v("c2") * &x(2)) - &(&v("a2") * &x(4)))),
            &(&(&r("p2", "q2") * &x(2)) * &x(3)) + &(&(&v("a2") * &x(3)) - &(&v("b2") * &x(2))),
        ];
        assert_eq!(f.components, expected);
    }

    #[test]
    fn convection_core_term_by_term() {
        // x' for the eight-mode convection core with q3 = 2 beta
        let f = builtin_model("model5-convection").unwrap().assemble_field();
        let beta = v("q3").scale(&ratio(1, 2));
        let xx = |i, j| &x(i) * &x(j);
        let expected = [
            -&(&xx(2, 3) + &xx(4, 5)),
            &(&xx(3, 1) - &x(3)) - &(&xx(5, 7) * &c(1, 2)),
            x(2),
            &(&xx(5, 1) - &x(5)) - &(&xx(3, 7) * &c(1, 2)),
            x(4),
            (&beta * &xx(7, 8)).scale(&rat(-2)),
            &(&(&(&beta * &xx(8, 6)).scale(&rat(2)) - &(&beta * &x(8))) + &(&xx(3, 4) * &c(1, 2)))
                + &(&xx(5, 2) * &c(1, 2)),
            &beta * &x(7),
        ];
        assert_eq!(f.components, expected);
    }

    #[test]
    fn two_d_convection_core_term_by_term() {
        let f = builtin_model("model4-convection").unwrap().assemble_field();
        let d = |k: usize| v(&format!("q{k}"));
        let xx = |i, j| &x(i) * &x(j);
        let expected = [
            -&(&(&(&d(1) * &xx(2, 3)) + &(&d(2) * &xx(4, 5))) + &(&d(3) * &xx(6, 7))),
            &(&d(1) * &xx(3, 1)) - &(&d(1) * &x(3)),
            &d(1) * &x(2),
            &(&d(2) * &xx(5, 1)) - &(&d(2) * &x(5)),
            &d(2) * &x(4),
            &(&d(3) * &xx(7, 1)) - &(&d(3) * &x(7)),
            &d(3) * &x(6),
        ];
        assert_eq!(f.components, expected);
    }

    #[test]
    fn hamiltonian_branch_specs() {
        let g = builtin_model("model3-hamiltonian").unwrap();
        assert_eq!(g.coefficients(2).p, v("q1"));
        assert_eq!(g.coefficients(3).r, v("q2").scale(&rat(2)));
        assert_eq!(spec_of(&g, "q2"), ParamSpec::Generic);
    }
}
