//! Coupled-gyrostat models: parameter specs, validation, vector-field
//! assembly and the energy check.

mod models;
mod symmetry;

pub use models::{builtin_model, builtin_names, dense, sparse};
pub use symmetry::{find_sign_symmetries, SignSymmetry, MAX_SYMMETRY_MODES};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{format_rational, ParamKind, Poly, Rational, Var, VarTable};

/// How one gyrostat coefficient is fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamSpec {
    Zero,
    /// A free symbol, treated as a nonzero indeterminate.
    Generic,
    Exact(Rational),
    /// A rational multiple of another coefficient, e.g. `b1 = a1` or
    /// `p3 = -q3`.
    Scaled(Rational, Var),
}

impl ParamSpec {
    pub fn exact(n: i64) -> Self {
        ParamSpec::Exact(crate::exactmath::rat(n))
    }

    pub fn link(factor: Rational, target: Var) -> Self {
        ParamSpec::Scaled(factor, target)
    }

    pub fn is_generic(&self) -> bool {
        matches!(self, ParamSpec::Generic)
    }
}

impl fmt::Display for ParamSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSpec::Zero => write!(f, "0"),
            ParamSpec::Generic => write!(f, "generic"),
            ParamSpec::Exact(q) => write!(f, "{}", format_rational(q)),
            ParamSpec::Scaled(s, v) if s.is_one() => write!(f, "{v}"),
            ParamSpec::Scaled(s, v) if *s == -Rational::one() => write!(f, "-{v}"),
            ParamSpec::Scaled(s, v) => write!(f, "{}*{v}", format_rational(s)),
        }
    }
}

impl std::str::FromStr for ParamSpec {
    type Err = Error;

    /// Accepts `0`, `generic`, a rational `n` or `n/d`, or a link such as
    /// `a1`, `-a1` or `1/2*q3`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "generic" {
            return Ok(ParamSpec::Generic);
        }
        if let Ok(q) = crate::exactmath::parse_rational(t) {
            return Ok(if q.is_zero() {
                ParamSpec::Zero
            } else {
                ParamSpec::Exact(q)
            });
        }
        let bad = || Error::Parse(format!("bad parameter spec {s:?}"));
        let (factor, name) = match t.rsplit_once('*') {
            Some((f, n)) => (crate::exactmath::parse_rational(f).map_err(|_| bad())?, n),
            None => match t.strip_prefix('-') {
                Some(n) => (-Rational::one(), n),
                None => (Rational::one(), t),
            },
        };
        let target = Var::parse(name.trim())
            .filter(|v| !v.is_state())
            .ok_or_else(bad)?;
        if factor.is_zero() {
            return Ok(ParamSpec::Zero);
        }
        Ok(ParamSpec::Scaled(factor, target))
    }
}

/// One Volterra gyrostat acting on the modes `(m1, m2, m3)`, 1-based.
///
/// Its contribution is
/// `y1' = p y2 y3 + b y3 - c y2`, `y2' = q y3 y1 + c y1 - a y3`,
/// `y3' = r y1 y2 + a y2 - b y1` with `y_j = x_{m_j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gyrostat {
    pub modes: [usize; 3],
    pub a: ParamSpec,
    pub b: ParamSpec,
    pub c: ParamSpec,
    pub p: ParamSpec,
    pub q: ParamSpec,
    /// `None` means derived as `-p - q`.
    pub r: Option<ParamSpec>,
}

impl Gyrostat {
    pub fn generic(modes: [usize; 3]) -> Self {
        Gyrostat {
            modes,
            a: ParamSpec::Generic,
            b: ParamSpec::Generic,
            c: ParamSpec::Generic,
            p: ParamSpec::Generic,
            q: ParamSpec::Generic,
            r: None,
        }
    }

    /// Gyrostat with only the quadratic couplings.
    pub fn nonlinear(modes: [usize; 3]) -> Self {
        Gyrostat {
            a: ParamSpec::Zero,
            b: ParamSpec::Zero,
            c: ParamSpec::Zero,
            ..Gyrostat::generic(modes)
        }
    }

    pub fn spec(&self, kind: ParamKind) -> Option<&ParamSpec> {
        match kind {
            ParamKind::A => Some(&self.a),
            ParamKind::B => Some(&self.b),
            ParamKind::C => Some(&self.c),
            ParamKind::P => Some(&self.p),
            ParamKind::Q => Some(&self.q),
            ParamKind::R => self.r.as_ref(),
        }
    }

    pub fn set(&mut self, kind: ParamKind, spec: ParamSpec) {
        match kind {
            ParamKind::A => self.a = spec,
            ParamKind::B => self.b = spec,
            ParamKind::C => self.c = spec,
            ParamKind::P => self.p = spec,
            ParamKind::Q => self.q = spec,
            ParamKind::R => self.r = Some(spec),
        }
    }

    pub fn with(mut self, kind: ParamKind, spec: ParamSpec) -> Self {
        self.set(kind, spec);
        self
    }
}

/// Resolved coefficients of one gyrostat as polynomials in the parameter
/// symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficients {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
    pub p: Poly,
    pub q: Poly,
    pub r: Poly,
}

impl Coefficients {
    pub fn get(&self, kind: ParamKind) -> &Poly {
        match kind {
            ParamKind::A => &self.a,
            ParamKind::B => &self.b,
            ParamKind::C => &self.c,
            ParamKind::P => &self.p,
            ParamKind::Q => &self.q,
            ParamKind::R => &self.r,
        }
    }
}

/// Right-hand side of an ODE system, one polynomial per mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub components: Vec<Poly>,
}

impl VectorField {
    pub fn zero(modes: usize) -> Self {
        VectorField {
            components: vec![Poly::zero(); modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.components.len()
    }

    /// `x_i'`, `i` 1-based.
    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i - 1]
    }

    /// Rate of change of `c` along the flow, `sum_i dc/dx_i * f_i`.
    pub fn derivative_along(&self, c: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (i, f) in self.components.iter().enumerate() {
            let d = c.derivative(Var::state(i + 1));
            if !d.is_zero() && !f.is_zero() {
                out += &(&d * f);
            }
        }
        out
    }

    pub fn substitute_values(&self, map: &BTreeMap<Var, Rational>) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .map(|p| p.substitute_values(map))
                .collect(),
        }
    }

    pub fn params(&self) -> BTreeSet<Var> {
        self.components
            .iter()
            .flat_map(Poly::vars)
            .filter(|v| !v.is_state())
            .collect()
    }
}

impl std::ops::Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Outcome of the energy-conservation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyCheck {
    pub ok: bool,
    /// 1-based indices of gyrostats with `p + q + r != 0`.
    pub offending: Vec<usize>,
    /// `d/dt (1/2 sum x_i^2)` along the assembled field.
    pub energy_rate: Poly,
}

/// A model: `M` modes driven by a list of gyrostats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glom {
    modes: usize,
    gyrostats: Vec<Gyrostat>,
    coefficients: Vec<Coefficients>,
    var_table: VarTable,
    warnings: Vec<String>,
}

impl Glom {
    pub fn new(modes: usize, gyrostats: Vec<Gyrostat>) -> Result<Self> {
        if modes < 3 {
            return Err(Error::InvalidModel(format!(
                "a model needs at least 3 modes, got {modes}"
            )));
        }
        for (k, g) in gyrostats.iter().enumerate() {
            let [m1, m2, m3] = g.modes;
            if m1 == m2 || m2 == m3 || m1 == m3 {
                return Err(Error::InvalidModel(format!(
                    "gyrostat {} has repeated modes {:?}",
                    k + 1,
                    g.modes
                )));
            }
            if let Some(&m) = g.modes.iter().find(|&&m| m < 1 || m > modes) {
                return Err(Error::InvalidModel(format!(
                    "gyrostat {} references mode {m} outside 1..={modes}",
                    k + 1
                )));
            }
        }
        let coefficients = Resolver::new(&gyrostats).resolve_all()?;
        let used: BTreeSet<usize> = gyrostats.iter().flat_map(|g| g.modes).collect();
        let warnings = (1..=modes)
            .filter(|m| !used.contains(m))
            .map(|m| format!("mode {m} is not referenced by any gyrostat"))
            .collect();
        let params = coefficients.iter().flat_map(|c| {
            ParamKind::ALL
                .into_iter()
                .flat_map(move |kind| c.get(kind).vars())
        });
        let var_table = VarTable::new(modes, params);
        Ok(Glom {
            modes,
            gyrostats,
            coefficients,
            var_table,
            warnings,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn gyrostats(&self) -> &[Gyrostat] {
        &self.gyrostats
    }

    pub fn k(&self) -> usize {
        self.gyrostats.len()
    }

    /// Resolved coefficients of gyrostat `k` (1-based).
    pub fn coefficients(&self, k: usize) -> &Coefficients {
        &self.coefficients[k - 1]
    }

    pub fn var_table(&self) -> &VarTable {
        &self.var_table
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Parameter symbols that remain free after resolution.
    pub fn generic_params(&self) -> BTreeSet<Var> {
        self.var_table.params().collect()
    }

    /// Parameters that may be set by name: `a..q` of every gyrostat, and `r`
    /// when it was supplied explicitly.
    pub fn param_names(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for (k, g) in self.gyrostats.iter().enumerate() {
            for kind in ParamKind::ALL {
                if g.spec(kind).is_some() {
                    out.push(Var::param(kind, k + 1));
                }
            }
        }
        out
    }

    /// Copy with one coefficient replaced.
    pub fn with_param(&self, name: Var, spec: ParamSpec) -> Result<Glom> {
        let (kind, k) = name
            .as_param()
            .ok_or_else(|| Error::Contract(format!("{name} is not a parameter")))?;
        if k > self.k() {
            return Err(Error::Contract(format!(
                "{name} refers to gyrostat {k}, model has {}",
                self.k()
            )));
        }
        let mut gs = self.gyrostats.clone();
        gs[k - 1].set(kind, spec);
        Glom::new(self.modes, gs)
    }

    /// Copy with free parameters replaced by numbers. Every assigned name
    /// must be a free parameter of the model.
    pub fn instantiate(&self, values: &BTreeMap<Var, Rational>) -> Result<Glom> {
        let free = self.generic_params();
        let mut gs = self.gyrostats.clone();
        for (name, value) in values {
            if !free.contains(name) {
                return Err(Error::Contract(format!("{name} is not a free parameter")));
            }
            let (kind, k) = name.as_param().expect("free parameters are parameters");
            gs[k - 1].set(
                kind,
                if value.is_zero() {
                    ParamSpec::Zero
                } else {
                    ParamSpec::Exact(value.clone())
                },
            );
        }
        Glom::new(self.modes, gs)
    }

    /// Copy with the listed coefficients set to zero. `r` cannot be listed
    /// because it is derived from `p` and `q`.
    pub fn with_zero(&self, names: &[Var]) -> Result<Glom> {
        let mut gs = self.gyrostats.clone();
        for &name in names {
            let (kind, k) = name
                .as_param()
                .ok_or_else(|| Error::Contract(format!("{name} is not a parameter")))?;
            if kind == ParamKind::R {
                return Err(Error::Contract(format!(
                    "{name} is derived from p and q; zero p or q instead"
                )));
            }
            if k > gs.len() {
                return Err(Error::Contract(format!(
                    "{name} refers to gyrostat {k}, model has {}",
                    gs.len()
                )));
            }
            gs[k - 1].set(kind, ParamSpec::Zero);
        }
        Glom::new(self.modes, gs)
    }

    /// Convenience form of [`Glom::with_zero`] taking names like `"q2"`.
    pub fn with_zero_names(&self, names: &[&str]) -> Result<Glom> {
        let vars = names
            .iter()
            .map(|n| Var::parse(n).ok_or_else(|| Error::Parse(format!("bad parameter name {n:?}"))))
            .collect::<Result<Vec<_>>>()?;
        self.with_zero(&vars)
    }

    /// Copy with every linear coefficient `a, b, c` set to zero.
    pub fn without_linear_feedback(&self) -> Glom {
        let gs = self
            .gyrostats
            .iter()
            .map(|g| Gyrostat {
                a: ParamSpec::Zero,
                b: ParamSpec::Zero,
                c: ParamSpec::Zero,
                ..g.clone()
            })
            .collect();
        Glom::new(self.modes, gs).expect("zeroing linear terms keeps the model valid")
    }

    /// Model made of the first `k` gyrostats over the first `modes` modes.
    pub fn truncated(&self, k: usize, modes: usize) -> Result<Glom> {
        Glom::new(modes, self.gyrostats[..k].to_vec())
    }

    /// Field of gyrostat `k` (1-based) alone.
    pub fn gyrostat_field(&self, k: usize) -> VectorField {
        let mut f = VectorField::zero(self.modes);
        self.add_gyrostat_field(k, &mut f);
        f
    }

    fn add_gyrostat_field(&self, k: usize, f: &mut VectorField) {
        let g = &self.gyrostats[k - 1];
        let c = &self.coefficients[k - 1];
        let [m1, m2, m3] = g.modes;
        let (y1, y2, y3) = (
            Poly::var(Var::state(m1)),
            Poly::var(Var::state(m2)),
            Poly::var(Var::state(m3)),
        );
        let rows = [
            (m1, &c.p, &y2, &y3, &c.b, &y3, &c.c, &y2),
            (m2, &c.q, &y3, &y1, &c.c, &y1, &c.a, &y3),
            (m3, &c.r, &y1, &y2, &c.a, &y2, &c.b, &y1),
        ];
        for (m, quad, u, v, plus, pv, minus, mv) in rows {
            let comp = &mut f.components[m - 1];
            *comp += &(&(quad * u) * v);
            *comp += &(plus * pv);
            *comp -= &(minus * mv);
        }
    }

    /// Superposed field of all gyrostats.
    pub fn assemble_field(&self) -> VectorField {
        let mut f = VectorField::zero(self.modes);
        for k in 1..=self.k() {
            self.add_gyrostat_field(k, &mut f);
        }
        f
    }

    pub fn check_energy(&self) -> EnergyCheck {
        let offending: Vec<usize> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !(&(&c.p + &c.q) + &c.r).is_zero())
            .map(|(k, _)| k + 1)
            .collect();
        let energy_rate = self
            .assemble_field()
            .derivative_along(&energy_poly(self.modes));
        EnergyCheck {
            ok: offending.is_empty() && energy_rate.is_zero(),
            offending,
            energy_rate,
        }
    }

    /// Errors with [`Error::Energy`] when the energy check fails.
    pub fn require_energy(&self) -> Result<()> {
        let chk = self.check_energy();
        if chk.ok {
            Ok(())
        } else {
            Err(Error::Energy(chk.offending))
        }
    }
}

/// `1/2 sum x_i^2`.
pub fn energy_poly(modes: usize) -> Poly {
    let half = Rational::new(1.into(), 2.into());
    let mut e = Poly::zero();
    for i in 1..=modes {
        let x = Poly::var(Var::state(i));
        e += &(&x * &x).scale(&half);
    }
    e
}

/// Resolves parameter specs, following links with cycle detection.
struct Resolver<'a> {
    gyrostats: &'a [Gyrostat],
    cache: BTreeMap<Var, Poly>,
    active: BTreeSet<Var>,
}

impl<'a> Resolver<'a> {
    fn new(gyrostats: &'a [Gyrostat]) -> Self {
        Resolver {
            gyrostats,
            cache: BTreeMap::new(),
            active: BTreeSet::new(),
        }
    }

    fn resolve_all(mut self) -> Result<Vec<Coefficients>> {
        (1..=self.gyrostats.len())
            .map(|k| {
                let mut get = |kind| self.resolve(Var::param(kind, k));
                Ok(Coefficients {
                    a: get(ParamKind::A)?,
                    b: get(ParamKind::B)?,
                    c: get(ParamKind::C)?,
                    p: get(ParamKind::P)?,
                    q: get(ParamKind::Q)?,
                    r: get(ParamKind::R)?,
                })
            })
            .collect()
    }

    fn resolve(&mut self, name: Var) -> Result<Poly> {
        if let Some(p) = self.cache.get(&name) {
            return Ok(p.clone());
        }
        let (kind, k) = name.as_param().expect("parameter variable");
        let g = self
            .gyrostats
            .get(k - 1)
            .ok_or_else(|| Error::InvalidModel(format!("{name} refers to a missing gyrostat")))?;
        if !self.active.insert(name) {
            return Err(Error::InvalidModel(format!(
                "parameter links form a cycle through {name}"
            )));
        }
        let value = if kind == ParamKind::R {
            let derived = -&(&self.resolve(Var::param(ParamKind::P, k))?
                + &self.resolve(Var::param(ParamKind::Q, k))?);
            match &g.r {
                None | Some(ParamSpec::Generic) => derived,
                Some(spec) => self.resolve_spec(name, spec)?,
            }
        } else {
            let spec = g.spec(kind).expect("a..q always present");
            self.resolve_spec(name, spec)?
        };
        self.active.remove(&name);
        self.cache.insert(name, value.clone());
        Ok(value)
    }

    fn resolve_spec(&mut self, name: Var, spec: &ParamSpec) -> Result<Poly> {
        Ok(match spec {
            ParamSpec::Zero => Poly::zero(),
            ParamSpec::Generic => Poly::var(name),
            ParamSpec::Exact(q) => Poly::constant(q.clone()),
            ParamSpec::Scaled(s, target) => {
                if target.is_state() {
                    return Err(Error::InvalidModel(format!(
                        "{name} is linked to a state variable"
                    )));
                }
                self.resolve(*target)?.scale(s)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;

    fn x(i: usize) -> Poly {
        Poly::var(Var::state(i))
    }
    fn v(name: &str) -> Poly {
        Poly::var(Var::parse(name).unwrap())
    }

    #[test]
    fn single_gyrostat_field_by_hand() {
        let g = Glom::new(3, vec![Gyrostat::generic([1, 2, 3])]).unwrap();
        let f = g.assemble_field();
        let r1 = -&(&v("p1") + &v("q1"));
        let e1 = &(&(&v("p1") * &x(2)) * &x(3)) + &(&(&v("b1") * &x(3)) - &(&v("c1") * &x(2)));
        let e2 = &(&(&v("q1") * &x(3)) * &x(1)) + &(&(&v("c1") * &x(1)) - &(&v("a1") * &x(3)));
        let e3 = &(&(&r1 * &x(1)) * &x(2)) + &(&(&v("a1") * &x(2)) - &(&v("b1") * &x(1)));
        assert_eq!(f.components, vec![e1, e2, e3]);
    }

    #[test]
    fn zero_gyrostat_gives_zero_field() {
        let zero = Gyrostat {
            p: ParamSpec::Zero,
            q: ParamSpec::Zero,
            ..Gyrostat::nonlinear([1, 2, 3])
        };
        let g = Glom::new(3, vec![zero]).unwrap();
        assert!(g.assemble_field().components.iter().all(Poly::is_zero));
    }

    #[test]
    fn exact_triple_must_sum_to_zero() {
        let g = Gyrostat {
            p: ParamSpec::exact(1),
            q: ParamSpec::exact(1),
            r: Some(ParamSpec::exact(1)),
            ..Gyrostat::nonlinear([1, 2, 3])
        };
        let chk = Glom::new(3, vec![g]).unwrap().check_energy();
        assert!(!chk.ok);
        assert_eq!(chk.offending, vec![1]);
    }

    #[test]
    fn links_resolve_and_cycles_fail() {
        let a1 = Var::parse("a1").unwrap();
        let g = Gyrostat::generic([1, 2, 3]).with(ParamKind::B, ParamSpec::link(rat(-2), a1));
        let m = Glom::new(3, vec![g]).unwrap();
        assert_eq!(m.coefficients(1).b, v("a1").scale(&rat(-2)));
        let b1 = Var::parse("b1").unwrap();
        let cyc = Gyrostat::generic([1, 2, 3])
            .with(ParamKind::B, ParamSpec::link(rat(1), a1))
            .with(ParamKind::A, ParamSpec::link(rat(1), b1));
        assert!(matches!(
            Glom::new(3, vec![cyc]),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn invalid_modes_rejected_and_unused_modes_warned() {
        assert!(Glom::new(3, vec![Gyrostat::generic([1, 1, 2])]).is_err());
        assert!(Glom::new(3, vec![Gyrostat::generic([1, 2, 4])]).is_err());
        let g = Glom::new(4, vec![Gyrostat::generic([1, 2, 3])]).unwrap();
        assert_eq!(g.warnings().len(), 1);
    }

    #[test]
    fn field_is_sum_of_gyrostat_fields() {
        let g = builtin_model("model3").unwrap();
        let mut sum = VectorField::zero(g.modes());
        for k in 1..=g.k() {
            sum = &sum + &g.gyrostat_field(k);
        }
        assert_eq!(sum, g.assemble_field());
    }

    #[test]
    fn param_specs_parse_and_print_round_trip() {
        for text in ["0", "generic", "3", "-2/5", "a1", "-a1", "1/2*q3", "-3*b2"] {
            let spec: ParamSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert_eq!("0/7".parse::<ParamSpec>().unwrap(), ParamSpec::Zero);
        for bad in ["", "x1", "1/0", "foo", "2*", "a0"] {
            assert!(bad.parse::<ParamSpec>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn instantiate_fixes_free_parameters_and_follows_links() {
        let g = Glom::new(
            3,
            vec![Gyrostat {
                b: ParamSpec::link(crate::exactmath::rat(2), Var::parse("a1").unwrap()),
                ..Gyrostat::generic([1, 2, 3])
            }],
        )
        .unwrap();
        let values: BTreeMap<Var, Rational> = [("a1", 3), ("c1", 0)]
            .into_iter()
            .map(|(n, v)| (Var::parse(n).unwrap(), crate::exactmath::rat(v)))
            .collect();
        let inst = g.instantiate(&values).unwrap();
        assert_eq!(inst.coefficients(1).b, Poly::int(6));
        assert!(inst.coefficients(1).c.is_zero());
        let bad: BTreeMap<Var, Rational> =
            [(Var::parse("b1").unwrap(), crate::exactmath::rat(1))].into();
        assert!(g.instantiate(&bad).is_err());
    }
}
