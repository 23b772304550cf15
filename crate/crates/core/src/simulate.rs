//! Fixed-step RK4 integration of instantiated models and drift of tracked
//! quadratic forms along the trajectory.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::exactmath::matrix::seeded_rng;
use crate::exactmath::rational::to_f64;
use crate::exactmath::{Poly, Rational, Var};
use crate::glom::Glom;
use crate::invariants::{independent_count, QuadraticForm};

/// Relative drift above which a symbolically verified invariant is
/// reported as inconsistent with the numerics.
pub const INCONSISTENCY_DRIFT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    /// Negative steps integrate backwards in time.
    pub dt: f64,
    /// Drawn uniformly from `[-1, 1]^M` with `seed` when absent.
    pub initial_state: Option<Vec<f64>>,
    pub params: BTreeMap<Var, Rational>,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(t_end: f64, dt: f64) -> Self {
        SimConfig {
            t_end,
            dt,
            initial_state: None,
            params: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with_state(mut self, x0: Vec<f64>) -> Self {
        self.initial_state = Some(x0);
        self
    }

    pub fn with_params(mut self, params: BTreeMap<Var, Rational>) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<usize> {
        let step = self.dt.abs();
        if !(self.dt.is_finite() && self.t_end.is_finite()) || self.dt == 0.0 {
            return Err(Error::Contract("dt must be finite and nonzero".into()));
        }
        if self.t_end < step {
            return Err(Error::Contract(format!(
                "t_end {} is shorter than one step {step}",
                self.t_end
            )));
        }
        Ok((self.t_end / step).round() as usize)
    }

    fn initial(&self, modes: usize) -> Result<Vec<f64>> {
        match &self.initial_state {
            Some(x0) if x0.len() != modes => Err(Error::Contract(format!(
                "initial state has {} entries, model has {modes} modes",
                x0.len()
            ))),
            Some(x0) => Ok(x0.clone()),
            None => {
                let mut rng = seeded_rng(self.seed);
                Ok((0..modes).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            }
        }
    }
}

/// Polynomial in the state only, ready for float evaluation.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl Compiled {
    fn new(p: &Poly, params: &BTreeMap<Var, Rational>) -> Result<Self> {
        let p = p.substitute_values(params);
        let mut terms = Vec::with_capacity(p.len());
        for (mono, c) in p.terms() {
            let mut powers = Vec::new();
            for &(v, e) in mono.powers() {
                let i = v
                    .state_index()
                    .ok_or_else(|| Error::Unassigned(v.to_string()))?;
                powers.push((i - 1, e as i32));
            }
            terms.push((to_f64(c), powers));
        }
        Ok(Compiled { terms })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, ps)| ps.iter().fold(*c, |acc, &(i, e)| acc * x[i].powi(e)))
            .sum()
    }
}

fn compile_field(g: &Glom, params: &BTreeMap<Var, Rational>) -> Result<Vec<Compiled>> {
    let missing: BTreeSet<Var> = g
        .assemble_field()
        .params()
        .into_iter()
        .filter(|v| !params.contains_key(v))
        .collect();
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(|v| v.to_string()).collect();
        return Err(Error::Unassigned(names.join(", ")));
    }
    g.assemble_field()
        .components
        .iter()
        .map(|c| Compiled::new(c, params))
        .collect()
}

fn rk4_step(field: &[Compiled], x: &[f64], h: f64) -> Vec<f64> {
    let f = |y: &[f64]| -> Vec<f64> { field.iter().map(|c| c.eval(y)).collect() };
    let shifted =
        |k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(xi, ki)| xi + s * ki).collect() };
    let k1 = f(x);
    let k2 = f(&shifted(&k1, h / 2.0));
    let k3 = f(&shifted(&k2, h / 2.0));
    let k4 = f(&shifted(&k3, h));
    (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantityDrift {
    pub name: String,
    pub initial: f64,
    pub max_abs_deviation: f64,
    /// Deviation over `max(1, |initial|)`.
    pub max_relative_drift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub steps: usize,
    pub dt: f64,
    pub initial_state: Vec<f64>,
    pub final_state: Vec<f64>,
    pub quantities: Vec<QuantityDrift>,
}

impl DriftReport {
    pub fn max_relative_drift(&self) -> f64 {
        self.quantities
            .iter()
            .map(|q| q.max_relative_drift)
            .fold(0.0, f64::max)
    }
}

/// Integrates `g` and records the drift of each named form at every step.
pub fn integrate(
    g: &Glom,
    cfg: &SimConfig,
    tracked: &[(String, QuadraticForm)],
) -> Result<DriftReport> {
    let steps = cfg.validate()?;
    let x0 = cfg.initial(g.modes())?;
    integrate_from(g, cfg, x0, steps, tracked)
}

fn integrate_from(
    g: &Glom,
    cfg: &SimConfig,
    x0: Vec<f64>,
    steps: usize,
    tracked: &[(String, QuadraticForm)],
) -> Result<DriftReport> {
    let field = compile_field(g, &cfg.params)?;
    let forms = tracked
        .iter()
        .map(|(_, q)| Compiled::new(&q.to_poly(), &cfg.params))
        .collect::<Result<Vec<_>>>()?;
    let initial: Vec<f64> = forms.iter().map(|c| c.eval(&x0)).collect();
    let mut max_dev = vec![0.0f64; forms.len()];
    let mut x = x0.clone();
    for step in 1..=steps {
        x = rk4_step(&field, &x, cfg.dt);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(step));
        }
        for (i, c) in forms.iter().enumerate() {
            max_dev[i] = max_dev[i].max((c.eval(&x) - initial[i]).abs());
        }
    }
    let quantities = tracked
        .iter()
        .zip(initial.iter().zip(&max_dev))
        .map(|((name, _), (&init, &dev))| QuantityDrift {
            name: name.clone(),
            initial: init,
            max_abs_deviation: dev,
            max_relative_drift: dev / init.abs().max(1.0),
        })
        .collect();
    Ok(DriftReport {
        steps,
        dt: cfg.dt,
        initial_state: x0,
        final_state: x,
        quantities,
    })
}

/// Integrates forward to `t_end`, then back with `-dt`; returns the
/// largest coordinate distance from the starting point.
pub fn time_reversal_error(g: &Glom, cfg: &SimConfig) -> Result<f64> {
    let steps = cfg.validate()?;
    let x0 = cfg.initial(g.modes())?;
    let fwd = integrate_from(g, cfg, x0.clone(), steps, &[])?;
    let back_cfg = SimConfig {
        dt: -cfg.dt,
        ..cfg.clone()
    };
    let back = integrate_from(g, &back_cfg, fwd.final_state, steps, &[])?;
    Ok(back
        .final_state
        .iter()
        .zip(&x0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Expected dimension of the invariant manifold holding a trajectory,
/// `M` minus the number of functionally independent invariants, after
/// checking along a trajectory that each invariant is conserved.
pub fn dimension_probe(g: &Glom, cfg: &SimConfig, basis: &[QuadraticForm]) -> Result<usize> {
    let numeric: Vec<QuadraticForm> = basis
        .iter()
        .map(|q| q.substitute_values(&cfg.params))
        .collect();
    if numeric.iter().any(|q| q.rational_unknowns().is_none()) {
        return Err(Error::Unassigned(
            "a basis coefficient depends on an unassigned parameter".into(),
        ));
    }
    let tracked: Vec<(String, QuadraticForm)> = numeric
        .iter()
        .enumerate()
        .map(|(i, q)| (format!("I{}", i + 1), q.clone()))
        .collect();
    let report = integrate(g, cfg, &tracked)?;
    if let Some(bad) = report
        .quantities
        .iter()
        .find(|q| q.max_relative_drift > INCONSISTENCY_DRIFT)
    {
        return Err(Error::Inconsistent(format!(
            "{} drifts by {:.3e} relative",
            bad.name, bad.max_relative_drift
        )));
    }
    Ok(g.modes() - independent_count(&numeric, g.modes(), cfg.seed))
}
