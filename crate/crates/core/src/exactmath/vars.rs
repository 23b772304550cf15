use std::fmt;

/// One of the six gyrostat coefficients, in registry order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamKind {
    A,
    B,
    C,
    P,
    Q,
    R,
}

impl ParamKind {
    pub const ALL: [ParamKind; 6] = [
        ParamKind::A,
        ParamKind::B,
        ParamKind::C,
        ParamKind::P,
        ParamKind::Q,
        ParamKind::R,
    ];

    pub fn letter(self) -> char {
        match self {
            ParamKind::A => 'a',
            ParamKind::B => 'b',
            ParamKind::C => 'c',
            ParamKind::P => 'p',
            ParamKind::Q => 'q',
            ParamKind::R => 'r',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c {
            'a' => ParamKind::A,
            'b' => ParamKind::B,
            'c' => ParamKind::C,
            'p' => ParamKind::P,
            'q' => ParamKind::Q,
            'r' => ParamKind::R,
            _ => return None,
        })
    }

    fn index(self) -> u32 {
        self as u32
    }
}

const PARAM_BASE: u32 = 1 << 24;
const KINDS: u32 = 6;

/// A variable of the universal polynomial ring: either a state variable
/// `x_i` or a gyrostat parameter such as `q_3`.
///
/// Every model shares this one ring, so polynomials from different models
/// can be compared after renaming. State variables sort before parameters,
/// parameters sort by gyrostat and then by `a,b,c,p,q,r`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// State variable `x_i`, `i` 1-based.
    pub fn state(i: usize) -> Var {
        assert!(
            i >= 1 && (i as u32) < PARAM_BASE,
            "state index out of range"
        );
        Var(i as u32 - 1)
    }

    /// Parameter `kind_k`, gyrostat `k` 1-based.
    pub fn param(kind: ParamKind, gyrostat: usize) -> Var {
        assert!(gyrostat >= 1, "gyrostat index is 1-based");
        Var(PARAM_BASE + (gyrostat as u32 - 1) * KINDS + kind.index())
    }

    pub fn is_state(self) -> bool {
        self.0 < PARAM_BASE
    }

    /// 1-based mode index for state variables.
    pub fn state_index(self) -> Option<usize> {
        self.is_state().then(|| self.0 as usize + 1)
    }

    pub fn as_param(self) -> Option<(ParamKind, usize)> {
        if self.is_state() {
            return None;
        }
        let off = self.0 - PARAM_BASE;
        let kind = ParamKind::ALL[(off % KINDS) as usize];
        Some((kind, (off / KINDS) as usize + 1))
    }

    pub fn name(self) -> String {
        self.to_string()
    }

    /// Parses names of the form `x12` or `q3`.
    pub fn parse(name: &str) -> Option<Var> {
        let mut chars = name.chars();
        let head = chars.next()?;
        let digits = chars.as_str();
        if digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || digits.starts_with('0')
        {
            return None;
        }
        let idx: usize = digits.parse().ok()?;
        if head == 'x' {
            return Some(Var::state(idx));
        }
        ParamKind::from_letter(head).map(|k| Var::param(k, idx))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_param() {
            None => write!(f, "x{}", self.0 + 1),
            Some((kind, k)) => write!(f, "{}{}", kind.letter(), k),
        }
    }
}

/// Ordered registry of the variables a model actually uses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    vars: Vec<Var>,
}

impl VarTable {
    /// State variables `x_1..x_M` followed by the given parameters in
    /// canonical order; duplicates are dropped.
    pub fn new(modes: usize, params: impl IntoIterator<Item = Var>) -> Self {
        let mut ps: Vec<Var> = params.into_iter().filter(|v| !v.is_state()).collect();
        ps.sort();
        ps.dedup();
        let vars = (1..=modes).map(Var::state).chain(ps).collect();
        VarTable { vars }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn states(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars.iter().copied().filter(|v| v.is_state())
    }

    pub fn params(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars.iter().copied().filter(|v| !v.is_state())
    }

    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.vars.binary_search(&v).ok()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.index_of(v).is_some()
    }

    pub fn names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name()).collect()
    }
}
