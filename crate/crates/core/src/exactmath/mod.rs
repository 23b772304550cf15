//! Exact arithmetic layer: rationals, polynomials, elimination.

pub mod matrix;
pub mod poly;
pub mod rational;
pub mod vars;

pub use matrix::{
    exact_rank, generic_rank, nullspace_exact, nullspace_symbolic, proportional, PolyMatrix,
};
pub use poly::{Monomial, Poly};
pub use rational::{format_rational, parse_rational, rat, ratio, Rational};
pub use vars::{ParamKind, Var, VarTable};
