use std::collections::BTreeMap;

use glom_core::exactmath::{parse_rational, Rational, Var};
use glom_core::glom::Glom;
use glom_core::hamiltonian::{build_j, casimirs_of, jacobi as jacobi_report};
use glom_core::hierarchy::{check_recurrence, hierarchy_report, Family, HierarchySpec, Schedule};
use glom_core::invariants::{count_invariants, enumerate_subclasses, QuadraticForm};
use glom_core::simulate::{integrate, SimConfig};
use serde_json::{json, Value};

use crate::config::{load_model, ModelConfig};
use crate::report;
use crate::{CliError, ModelArg, Outcome, ScheduleArg, Track};

fn param_names(names: &[String]) -> Result<Vec<Var>, CliError> {
    names
        .iter()
        .map(|n| {
            Var::parse(n.trim())
                .filter(|v| !v.is_state())
                .ok_or_else(|| CliError::Usage(format!("{n:?} is not a parameter name")))
        })
        .collect()
}

fn prepare(m: &ModelArg) -> Result<Glom, CliError> {
    let g = load_model(&m.model)?;
    if m.zero.is_empty() {
        return Ok(g);
    }
    Ok(g.with_zero(&param_names(&m.zero)?)?)
}

fn base(command: &str, g: &Glom, seed: Option<u64>) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("command".into(), json!(command));
    map.insert(
        "model".into(),
        serde_json::to_value(ModelConfig::from_glom(g)).expect("config serializes"),
    );
    if let Some(s) = seed {
        map.insert("seed".into(), json!(s));
    }
    if !g.warnings().is_empty() {
        map.insert("warnings".into(), json!(g.warnings()));
    }
    map
}

fn done(map: serde_json::Map<String, Value>, table: Vec<String>, ok: bool) -> Outcome {
    Outcome {
        report: Value::Object(map),
        table,
        ok,
    }
}

pub fn check(m: &ModelArg) -> Result<Outcome, CliError> {
    let g = prepare(m)?;
    let e = g.check_energy();
    let mut map = base("check", &g, None);
    map.insert("energy_ok".into(), json!(e.ok));
    map.insert("offending_gyrostats".into(), json!(e.offending));
    map.insert("energy_rate".into(), report::poly(&e.energy_rate));
    let mut table = vec![format!("modes {}  gyrostats {}", g.modes(), g.k())];
    table.push(if e.ok {
        "energy constraint holds".to_string()
    } else {
        format!(
            "energy constraint violated by gyrostat(s) {:?}",
            e.offending
        )
    });
    Ok(done(map, table, e.ok))
}

pub fn invariants(
    m: &ModelArg,
    subclass: Option<&str>,
    vary: &[String],
    seed: u64,
) -> Result<Outcome, CliError> {
    let mut g = prepare(m)?;
    let mut map;
    if let Some(mask) = subclass {
        let vars = param_names(vary)?;
        if mask.len() != vars.len() || !mask.chars().all(|c| c == '0' || c == '1') {
            return Err(CliError::Usage(format!(
                "mask {mask:?} must be {} characters of 0 and 1",
                vars.len()
            )));
        }
        let zeroed: Vec<Var> = mask
            .chars()
            .zip(&vars)
            .filter(|(c, _)| *c == '0')
            .map(|(_, v)| *v)
            .collect();
        g = g.with_zero(&zeroed)?;
        map = base("invariants", &g, Some(seed));
        map.insert("subclass".into(), json!(mask));
        map.insert("vary".into(), json!(vary));
    } else {
        map = base("invariants", &g, Some(seed));
    }
    let r = count_invariants(&g, seed)?;
    map.insert("raw_count".into(), json!(r.raw_count));
    map.insert("independent_count".into(), json!(r.independent_count));
    map.insert("energy_included".into(), json!(r.energy_included));
    map.insert("basis".into(), report::forms(&r.basis));
    map.insert("instance".into(), report::assignment(&r.instance));
    map.insert("system_size".into(), json!([r.rows, r.cols]));
    let mut table = vec![format!(
        "raw {}  independent {}  energy in span {}",
        r.raw_count, r.independent_count, r.energy_included
    )];
    table.extend(
        r.basis
            .iter()
            .enumerate()
            .map(|(i, f)| format!("  I{}: {f}", i + 1)),
    );
    Ok(done(map, table, true))
}

pub fn jacobi(m: &ModelArg) -> Result<Outcome, CliError> {
    let g = prepare(m)?;
    let j = build_j(&g)?;
    let r = jacobi_report(&j);
    let mut map = base("jacobi", &g, None);
    map.insert("is_hamiltonian".into(), json!(r.is_hamiltonian));
    map.insert("convention".into(), json!(r.convention));
    map.insert(
        "residuals".into(),
        Value::Array(
            r.residuals
                .iter()
                .map(|(t, p)| json!({"triple": report::triple(t), "residual": report::poly(p)}))
                .collect(),
        ),
    );
    map.insert(
        "constraint_polys".into(),
        report::polys(&r.constraint_polys),
    );
    map.insert("contracted".into(), report::poly(&r.contracted));
    map.insert("contracted_diverges".into(), json!(r.contracted_diverges()));
    let mut table = vec![format!(
        "Jacobi identity {}  ({} nonzero triples)",
        if r.is_hamiltonian { "holds" } else { "fails" },
        r.residuals.len()
    )];
    table.extend(r.residuals.iter().map(|(t, p)| format!("  {:?}: {p}", t)));
    if r.contracted_diverges() {
        table.push("  note: the contracted scalar vanishes although triples do not".into());
    }
    Ok(done(map, table, true))
}

pub fn casimirs(m: &ModelArg, seed: u64) -> Result<Outcome, CliError> {
    let g = prepare(m)?;
    let j = build_j(&g)?;
    let c = casimirs_of(&j, seed)?;
    let mut map = base("casimirs", &g, Some(seed));
    map.insert(
        "nullspace_basis".into(),
        Value::Array(c.nullspace_basis.iter().map(|v| report::polys(v)).collect()),
    );
    map.insert("gradient_flags".into(), json!(c.gradient_flags));
    map.insert("potentials".into(), report::forms(&c.potentials));
    map.insert("casimirs".into(), report::forms(&c.casimirs));
    map.insert("count".into(), json!(c.count));
    map.insert("advisory".into(), json!(c.advisory));
    let mut table = vec![format!(
        "nullspace dim {}  Casimirs {}{}",
        c.nullspace_basis.len(),
        c.count,
        if c.advisory {
            "  (advisory: Jacobi identity fails)"
        } else {
            ""
        }
    )];
    table.extend(
        c.casimirs
            .iter()
            .enumerate()
            .map(|(i, f)| format!("  C{}: {f}", i + 1)),
    );
    Ok(done(map, table, true))
}

pub fn enumerate(m: &ModelArg, vary: &[String], seed: u64) -> Result<Outcome, CliError> {
    let g = prepare(m)?;
    let vars = param_names(vary)?;
    let rows = enumerate_subclasses(&g, &vars, seed)?;
    let mut map = base("enumerate", &g, Some(seed));
    map.insert("vary".into(), json!(vary));
    map.insert(
        "rows".into(),
        Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "mask": r.mask,
                        "zeroed": r.zeroed.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                        "raw_count": r.raw_count,
                        "independent_count": r.independent_count,
                    })
                })
                .collect(),
        ),
    );
    let mut table = vec![format!("mask ({})  raw  independent", vary.join(","))];
    table.extend(rows.iter().map(|r| {
        format!(
            "{:>6}  {:>3}  {:>3}",
            r.mask, r.raw_count, r.independent_count
        )
    }));
    Ok(done(map, table, true))
}

pub fn hierarchy(
    family: &str,
    k: usize,
    schedule: ScheduleArg,
    unconstrained: bool,
    seed: u64,
) -> Result<Outcome, CliError> {
    let fam: Family = family
        .parse()
        .map_err(|e: glom_core::Error| CliError::Usage(e.to_string()))?;
    let spec = if unconstrained {
        HierarchySpec::unconstrained(fam, k)
    } else {
        HierarchySpec::builtin(fam, k)
    }
    .map_err(|e| CliError::Usage(e.to_string()))?
    .with_schedule(match schedule {
        ScheduleArg::Final => Schedule::Final,
        ScheduleArg::Cumulative => Schedule::Cumulative,
    });
    let r = hierarchy_report(&spec, seed)?;
    let mut map = serde_json::Map::new();
    map.insert("command".into(), json!("hierarchy"));
    map.insert("family".into(), json!(fam.name()));
    map.insert("k_max".into(), json!(k));
    map.insert("seed".into(), json!(seed));
    map.insert("constrained".into(), json!(!unconstrained));
    map.insert(
        "schedule".into(),
        json!(match spec.schedule {
            Schedule::Final => "final",
            Schedule::Cumulative => "cumulative",
        }),
    );
    if k >= 3 {
        map.insert("recurrence".into(), json!(check_recurrence(fam, k)?));
    }
    let mut table = vec!["K  modes  Jacobi  contracted=0  Casimirs  projection".to_string()];
    let members: Vec<Value> = r
        .members
        .iter()
        .map(|mr| {
            table.push(format!(
                "{:<2} {:>5}  {:<6}  {:<12}  {:>8}  {}",
                mr.k,
                mr.modes,
                mr.jacobi.is_hamiltonian,
                mr.jacobi.contracted.is_zero(),
                mr.casimirs.count,
                mr.projection_consistency
                    .map_or("-".to_string(), |b| b.to_string())
            ));
            json!({
                "k": mr.k,
                "modes": mr.modes,
                "model": serde_json::to_value(ModelConfig::from_glom(&mr.model)).expect("serializes"),
                "is_hamiltonian": mr.jacobi.is_hamiltonian,
                "contracted": report::poly(&mr.jacobi.contracted),
                "incremental_condition": report::poly(&mr.incremental.combined()),
                "incremental_constraints": report::polys(&mr.incremental.constraints),
                "casimir_count": mr.casimirs.count,
                "casimir_gradients": Value::Array(
                    mr.casimirs.casimirs.iter().map(|c| report::polys(&c.gradient())).collect()
                ),
                "projection_consistency": mr.projection_consistency,
            })
        })
        .collect();
    map.insert("members".into(), Value::Array(members));
    map.insert("casimir_counts".into(), json!(r.casimir_counts()));
    Ok(done(map, table, true))
}

fn parse_assignments(items: &[String]) -> Result<BTreeMap<Var, Rational>, CliError> {
    items
        .iter()
        .map(|item| {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected NAME=VALUE, got {item:?}")))?;
            let var = param_names(&[name.to_string()])?[0];
            let q = parse_rational(value).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok((var, q))
        })
        .collect()
}

pub fn simulate(
    m: &ModelArg,
    t: f64,
    dt: f64,
    assign: &[String],
    state: &[f64],
    track: Track,
    seed: u64,
) -> Result<Outcome, CliError> {
    let g = prepare(m)?;
    let values = parse_assignments(assign)?;
    let inst = g.instantiate(&values)?;
    let free = inst.generic_params();
    if !free.is_empty() {
        let names: Vec<String> = free.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Failure(format!(
            "assign values to {} with --assign",
            names.join(", ")
        )));
    }
    let mut tracked: Vec<(String, QuadraticForm)> =
        vec![("energy".into(), QuadraticForm::energy(inst.modes()))];
    if track == Track::All {
        let inv = count_invariants(&inst, seed)?;
        tracked.extend(
            inv.basis
                .into_iter()
                .enumerate()
                .map(|(i, q)| (format!("I{}", i + 1), q)),
        );
    }
    if track != Track::Energy {
        let c = casimirs_of(&build_j(&inst)?, seed)?;
        tracked.extend(
            c.casimirs
                .into_iter()
                .enumerate()
                .map(|(i, q)| (format!("C{}", i + 1), q)),
        );
    }
    let mut cfg = SimConfig::new(t, dt).with_seed(seed);
    if !state.is_empty() {
        cfg = cfg.with_state(state.to_vec());
    }
    let r = integrate(&inst, &cfg, &tracked)?;
    let mut map = base("simulate", &g, Some(seed));
    map.insert("assignment".into(), report::assignment(&values));
    map.insert("t_end".into(), json!(t));
    map.insert("dt".into(), json!(dt));
    map.insert("steps".into(), json!(r.steps));
    map.insert("initial_state".into(), json!(r.initial_state));
    map.insert("final_state".into(), json!(r.final_state));
    map.insert(
        "drift".into(),
        Value::Array(
            r.quantities
                .iter()
                .zip(&tracked)
                .map(|(q, (_, form))| {
                    json!({
                        "name": q.name,
                        "form": report::form(form),
                        "initial": q.initial,
                        "max_abs_deviation": q.max_abs_deviation,
                        "max_relative_drift": q.max_relative_drift,
                    })
                })
                .collect(),
        ),
    );
    map.insert("max_relative_drift".into(), json!(r.max_relative_drift()));
    let mut table = vec![format!("{} RK4 steps of {dt}", r.steps)];
    table.extend(r.quantities.iter().map(|q| {
        format!(
            "  {:<8} initial {:>12.6e}  relative drift {:.3e}",
            q.name, q.initial, q.max_relative_drift
        )
    }));
    Ok(done(map, table, true))
}

pub fn export(model: &str) -> Result<Outcome, CliError> {
    let g = load_model(model)?;
    Ok(Outcome {
        report: serde_json::to_value(ModelConfig::from_glom(&g)).expect("config serializes"),
        table: Vec::new(),
        ok: true,
    })
}
