//! Dense matrices of polynomials and exact elimination over the rationals
//! and over the fraction field of the polynomial ring.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{normalize_vector, Poly};
use super::rational::{integer_primitive, Rational};
use super::vars::Var;
use crate::error::{Error, Result};

/// Lower bound (inclusive) of the integers drawn for generic parameters.
pub const GENERIC_LOW: i64 = 1 << 20;
/// Upper bound (exclusive) of the integers drawn for generic parameters.
pub const GENERIC_HIGH: i64 = 1 << 31;
pub const DEFAULT_TRIALS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            data: vec![Poly::zero(); rows * cols],
        }
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Poly>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Contract(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(PolyMatrix {
            rows: n,
            cols,
            data,
        })
    }

    pub fn from_rationals(rows: &[Vec<Rational>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().cloned().map(Poly::constant).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.data[i * self.cols + j] = p;
    }

    pub fn add_to(&mut self, i: usize, j: usize, p: &Poly) {
        self.data[i * self.cols + j] += p;
    }

    pub fn row(&self, i: usize) -> &[Poly] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &Poly> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Poly::is_zero)
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut t = PolyMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Poly]) -> Result<Vec<Poly>> {
        if v.len() != self.cols {
            return Err(Error::Contract(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Poly::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.data.iter().flat_map(Poly::vars).collect()
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn substitute_values(&self, map: &BTreeMap<Var, Rational>) -> PolyMatrix {
        self.map(|p| p.substitute_values(map))
    }

    /// Entry values when the matrix holds constants only.
    pub fn to_rationals(&self) -> Option<Vec<Vec<Rational>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(Poly::constant_value).collect())
            .collect()
    }
}

/// Integer rows in reduced echelon form: every pivot column is zero outside
/// its pivot row, rows are primitive.
struct IntEchelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    cols: usize,
}

fn primitive_int_row(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for v in row.iter() {
        if !v.is_zero() {
            g = g.gcd(v);
            if g.is_one() {
                return;
            }
        }
    }
    if g > BigInt::one() {
        for v in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// Fraction-free Gauss-Jordan elimination on primitive rows. Pivot rule:
/// columns left to right, first row (in current order) with a nonzero
/// entry.
fn int_echelon(mut rows: Vec<Vec<BigInt>>, cols: usize) -> IntEchelon {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(found) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, found);
        let (before, rest) = rows.split_at_mut(rank);
        let (pivot_row, tail) = rest.split_at_mut(1);
        let prow = &pivot_row[0];
        let p = prow[col].clone();
        let eliminate = |row: &mut Vec<BigInt>| {
            let a = row[col].clone();
            if a.is_zero() {
                return;
            }
            let g = p.gcd(&a);
            let (pm, am) = (&p / &g, &a / &g);
            for (x, y) in row.iter_mut().zip(prow.iter()) {
                *x = &*x * &pm - y * &am;
            }
            primitive_int_row(row);
        };
        tail.iter_mut().for_each(eliminate);
        before.iter_mut().for_each(eliminate);
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    IntEchelon { rows, pivots, cols }
}

/// Fraction-free forward elimination (Bareiss): every update is divided
/// exactly by the previous pivot, so entries stay bounded by minors of the
/// input. Same pivot rule as [`int_echelon`].
fn bareiss_forward(mut rows: Vec<Vec<BigInt>>, cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(found) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, found);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let prow = &head[rank];
        let p = &prow[col];
        for row in tail.iter_mut() {
            let a = std::mem::take(&mut row[col]);
            if a.is_zero() {
                for e in row[col + 1..cols].iter_mut() {
                    if !e.is_zero() {
                        *e = &(&*e * p) / &prev;
                    }
                }
                continue;
            }
            for j in col + 1..cols {
                row[j] = (&row[j] * p - &a * &prow[j]) / &prev;
            }
        }
        prev = p.clone();
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    (rows, pivots)
}

fn echelon(rows: Vec<Vec<BigInt>>, cols: usize, reduce: bool) -> IntEchelon {
    let (mut rows, pivots) = bareiss_forward(rows, cols);
    if !reduce {
        return IntEchelon { rows, pivots, cols };
    }
    for r in rows.iter_mut() {
        primitive_int_row(r);
    }
    int_echelon(rows, cols)
}

impl IntEchelon {
    fn nullspace(&self) -> Vec<Vec<BigInt>> {
        let pivot_set: BTreeSet<usize> = self.pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for f in (0..self.cols).filter(|c| !pivot_set.contains(c)) {
            let mut l = BigInt::one();
            for (k, row) in self.rows.iter().enumerate() {
                if !row[f].is_zero() {
                    l = l.lcm(&row[self.pivots[k]]);
                }
            }
            let mut v = vec![BigInt::zero(); self.cols];
            v[f] = l.clone();
            for (k, row) in self.rows.iter().enumerate() {
                if !row[f].is_zero() {
                    let pc = self.pivots[k];
                    v[pc] = -(&row[f] * (&l / &row[pc]));
                }
            }
            primitive_int_row(&mut v);
            if v.iter()
                .find(|x| !x.is_zero())
                .is_some_and(|x| x.is_negative())
            {
                v.iter_mut().for_each(|x| *x = -&*x);
            }
            basis.push(v);
        }
        basis
    }
}

fn constant_rows(m: &PolyMatrix) -> Result<Vec<Vec<BigInt>>> {
    let vals = m
        .to_rationals()
        .ok_or_else(|| Error::Contract("matrix has non-constant entries".into()))?;
    Ok(vals
        .into_iter()
        .filter_map(|r| integer_primitive(&r).map(|(ints, _)| ints))
        .collect())
}

/// Rank of a matrix with constant entries.
pub fn exact_rank(m: &PolyMatrix) -> Result<usize> {
    Ok(echelon(constant_rows(m)?, m.cols(), false).pivots.len())
}

/// Rank of rational rows, convenient for numeric callers.
pub fn rational_rank(rows: &[Vec<Rational>], cols: usize) -> usize {
    let ints = rows
        .iter()
        .filter_map(|r| integer_primitive(r).map(|(ints, _)| ints))
        .collect();
    echelon(ints, cols, false).pivots.len()
}

/// Basis of the right nullspace of a constant matrix. Vectors are
/// primitive integer vectors whose first nonzero entry is positive, one
/// per non-pivot column in increasing column order.
pub fn nullspace_exact(m: &PolyMatrix) -> Result<Vec<Vec<BigInt>>> {
    Ok(echelon(constant_rows(m)?, m.cols(), true).nullspace())
}

/// Nullspace of rational rows, returned as rational vectors.
pub fn rational_nullspace(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let ints = rows
        .iter()
        .filter_map(|r| integer_primitive(r).map(|(ints, _)| ints))
        .collect();
    echelon(ints, cols, true)
        .nullspace()
        .into_iter()
        .map(|v| v.into_iter().map(Rational::from_integer).collect())
        .collect()
}

fn poly_row_content(row: &mut [Poly]) {
    normalize_vector(row);
}

/// Divides every entry by `d` when all of them are divisible.
fn try_divide_row(row: &mut [Poly], d: &Poly) -> bool {
    if d.is_constant() {
        return false;
    }
    let mut out = Vec::with_capacity(row.len());
    for p in row.iter() {
        match p.div_exact(d) {
            Some(q) => out.push(q),
            None => return false,
        }
    }
    row.clone_from_slice(&out);
    true
}

fn pivot_key(p: &Poly, row: usize) -> (u32, usize, usize) {
    (p.degree(), p.len(), row)
}

/// Basis of the nullspace over the fraction field of the polynomial ring.
///
/// Pivot rule: columns left to right; within a column the candidate entry
/// with the lowest total degree, then fewest terms, then lowest row. Each
/// vector is free of denominators, rational content and common monomial
/// factors, with positive leading coefficient in its first nonzero entry.
pub fn nullspace_symbolic(m: &PolyMatrix) -> Vec<Vec<Poly>> {
    let cols = m.cols();
    let mut rows: Vec<Vec<Poly>> = (0..m.rows())
        .map(|i| m.row(i).to_vec())
        .filter(|r| r.iter().any(|p| !p.is_zero()))
        .collect();
    for r in rows.iter_mut() {
        poly_row_content(r);
    }
    let mut pivots: Vec<usize> = Vec::new();
    let mut pivot_polys: Vec<Poly> = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(found) = (rank..rows.len())
            .filter(|&r| !rows[r][col].is_zero())
            .min_by_key(|&r| pivot_key(&rows[r][col], r))
        else {
            continue;
        };
        rows.swap(rank, found);
        let (before, rest) = rows.split_at_mut(rank);
        let (pivot_row, tail) = rest.split_at_mut(1);
        let prow = &pivot_row[0];
        let p = prow[col].clone();
        let eliminate = |row: &mut Vec<Poly>| {
            if row[col].is_zero() {
                return;
            }
            let a = row[col].clone();
            if let Some(f) = a.div_exact(&p) {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    if !y.is_zero() {
                        *x -= &(&f * y);
                    }
                }
            } else {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    let mut nx = &*x * &p;
                    if !y.is_zero() {
                        nx -= &(&a * y);
                    }
                    *x = nx;
                }
                try_divide_row(row, &a);
                try_divide_row(row, &p);
            }
            poly_row_content(row);
        };
        tail.iter_mut().for_each(eliminate);
        for row in before.iter_mut() {
            eliminate(row);
        }
        for q in pivot_polys.clone() {
            while try_divide_row(&mut rows[rank], &q) {}
        }
        pivots.push(col);
        pivot_polys.push(rows[rank][col].clone());
        rank += 1;
    }
    rows.truncate(rank);
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivot_set.contains(c)) {
        let mut l = Poly::one();
        for (k, row) in rows.iter().enumerate() {
            if !row[f].is_zero() {
                let pk = &row[pivots[k]];
                if l.div_exact(pk).is_none() {
                    l = &l * pk;
                }
            }
        }
        let mut v = vec![Poly::zero(); cols];
        v[f] = l.clone();
        for (k, row) in rows.iter().enumerate() {
            if !row[f].is_zero() {
                let pc = pivots[k];
                let cof = l.div_exact(&row[pc]).expect("pivot divides multiplier");
                v[pc] = -(&row[f] * &cof);
            }
        }
        normalize_vector(&mut v);
        for q in &pivot_polys {
            while try_divide_row(&mut v, q) {}
        }
        normalize_vector(&mut v);
        basis.push(v);
    }
    basis
}

/// Draws an independent integer in `[2^20, 2^31)` for each variable.
pub fn random_assignment(
    vars: impl IntoIterator<Item = Var>,
    rng: &mut impl Rng,
) -> BTreeMap<Var, Rational> {
    vars.into_iter()
        .map(|v| {
            (
                v,
                Rational::from_integer(BigInt::from(rng.gen_range(GENERIC_LOW..GENERIC_HIGH))),
            )
        })
        .collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Maximum rank over `trials` random integer substitutions of the
/// generic variables.
pub fn generic_rank(
    m: &PolyMatrix,
    generic: &BTreeSet<Var>,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    Ok(generic_rank_with_point(m, generic, trials, seed)?.0)
}

/// As [`generic_rank`], also returning the substitution that attained the
/// maximum (the first such trial).
pub fn generic_rank_with_point(
    m: &PolyMatrix,
    generic: &BTreeSet<Var>,
    trials: usize,
    seed: u64,
) -> Result<(usize, BTreeMap<Var, Rational>)> {
    if trials < 1 {
        return Err(Error::Contract(
            "generic_rank needs at least one trial".into(),
        ));
    }
    if let Some(v) = m.vars().into_iter().find(|v| !generic.contains(v)) {
        return Err(Error::Contract(format!(
            "variable {v} is not in the generic set"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut best: Option<(usize, BTreeMap<Var, Rational>)> = None;
    for _ in 0..trials {
        let point = random_assignment(generic.iter().copied(), &mut rng);
        let r = exact_rank(&m.substitute_values(&point))?;
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, point));
        }
        if r == m.rows().min(m.cols()) {
            break;
        }
    }
    Ok(best.expect("at least one trial"))
}

/// True iff `v1` and `v2` are parallel as polynomial vectors: all 2x2
/// minors vanish and both have the same zero pattern. Two zero vectors
/// count as proportional.
pub fn proportional(v1: &[Poly], v2: &[Poly]) -> Result<bool> {
    if v1.len() != v2.len() {
        return Err(Error::Contract(format!(
            "vectors of length {} and {}",
            v1.len(),
            v2.len()
        )));
    }
    let z1 = v1.iter().all(Poly::is_zero);
    let z2 = v2.iter().all(Poly::is_zero);
    if z1 || z2 {
        return Ok(z1 && z2);
    }
    for i in 0..v1.len() {
        if v1[i].is_zero() != v2[i].is_zero() {
            return Ok(false);
        }
    }
    for i in 0..v1.len() {
        for j in i + 1..v1.len() {
            if &v1[i] * &v2[j] != &v1[j] * &v2[i] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
