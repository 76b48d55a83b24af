//! Exact rationals and sparse polynomials in `x` and the times `t1..tN`.

pub mod poly;
pub mod rational;

pub use poly::{poly, Monomial, Poly, Var};
pub use rational::{int, rat, Rational};
