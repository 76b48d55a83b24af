//! The dispersionless (hbar-order 0) layer: Poisson-dressed `L0`, `M0`, the seed
//! condition, and the triangular matcher that produces the Kontsevich seed.

use num_traits::Zero;

use crate::algebra::rational::{binomial, int, rat};
use crate::algebra::{Monomial, Poly, Rational, Var};
use crate::error::{Error, Result};
use crate::solver::zeta;
use crate::symbol::calculus::{inverse, mul, poisson, poisson_exp, pow, series_exp};
use crate::symbol::{Exp, Range, Symbol, TruncationPolicy};

/// `L0 = xi + sum u_n xi^-n` and its canonical partner `M0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispersionlessPair {
    pub l: Symbol,
    pub m: Symbol,
}

/// `exp(ad_{ } alpha0 log xi) target`, with `{log xi, a} = xi^-1 d_x a`.
pub fn poisson_log_exp(alpha0: &Rational, target: &Symbol) -> Symbol {
    if alpha0.is_zero() {
        return target.clone();
    }
    series_exp(target, |z| z.diff(Var::X).mul_xi(-1).scale(alpha0))
}

/// `exp(ad_{ } zeta(t, xi)) x = x + sum n t_n xi^(n-1)`.
fn timed_x(policy: TruncationPolicy, n_times: u32) -> Symbol {
    let z = zeta(policy, n_times);
    let x = Symbol::x(policy);
    &x + &poisson(&z, &x)
}

/// Poisson dressing of `(xi, x)` by `X0`, `alpha0` and the active times.
pub fn dkp_dress(x0: &Symbol, alpha0: &Rational, n_times: u32) -> Result<DispersionlessPair> {
    let policy = x0.policy();
    let l = poisson_exp(x0, &Symbol::xi_pow(policy, 1))?;
    let m = poisson_exp(x0, &poisson_log_exp(alpha0, &timed_x(policy, n_times)))?;
    Ok(DispersionlessPair { l, m })
}

/// Commutative substitution `x -> M`, `xi -> L` into an hbar-free symbol.
pub fn substitute(f0: &Symbol, pair: &DispersionlessPair) -> Result<Symbol> {
    let policy = pair.l.policy().meet(&pair.m.policy());
    let mut l_inv: Option<Symbol> = None;
    let mut out = Symbol::zero(policy);
    for (e, coef) in f0.terms() {
        if e.h != 0 {
            return Err(Error::Domain("substitution expects an hbar-free symbol".into()));
        }
        let l_part = if e.xi >= 0 {
            pow(&pair.l, e.xi as u32)
        } else {
            if l_inv.is_none() {
                l_inv = Some(inverse(&pair.l)?);
            }
            pow(l_inv.as_ref().unwrap(), e.xi.unsigned_abs())
        };
        for (mono, c) in coef.terms() {
            let mx = mono.exponent(Var::X);
            let scalar = Poly::monomial(mono.without_x(), c.clone());
            let term = mul(&pow(&pair.m, mx), &l_part).scale_poly(&scalar);
            out += &term;
        }
    }
    Ok(out)
}

/// Lowest level at which a substitution into `f0` is still exact.
fn substitution_floor(policy: &TruncationPolicy, f0: &Symbol) -> i32 {
    policy.xi_floor + 2 + f0.ord().unwrap_or(0).max(0)
}

/// Seed condition: `f0(M, L)` and `g0(M, L)` have no negative powers.
pub fn dkp_check(f0: &Symbol, g0: &Symbol, pair: &DispersionlessPair) -> Result<bool> {
    let policy = pair.l.policy();
    for s in [f0, g0] {
        let sub = substitute(s, pair)?;
        if !sub.project(Range::Negative).cut_below(substitution_floor(&policy, s)).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `M` for the Kontsevich model at `t = 0`:
/// `x - sum_{n>=2} 2 binom(1/2, n) x^n xi^(2 - 2n)`.
pub fn kontsevich_m_series(policy: TruncationPolicy) -> Symbol {
    let mut m = Symbol::x(policy);
    let half = rat(1, 2);
    for n in 2u32.. {
        let xi = 2 - 2 * n as i32;
        if xi < policy.xi_floor {
            break;
        }
        let c = -(binomial(&half, n) * int(2));
        m.add_term(Exp::new(0, xi), Poly::monomial(Monomial::var(Var::X, n), c));
    }
    m
}

/// Matches `exp(ad X0) exp(ad alpha0 log xi) x` against `target` one xi-level at a
/// time: the `xi^(-k-1)` coefficient is linear in `chi_k` with slope `-k`.
pub fn bootstrap_seed(target: &Symbol, depth: usize) -> Result<(Symbol, Rational)> {
    let policy = target.policy();
    let base = Symbol::x(policy);
    let alpha0 = target
        .coeff(0, -1)
        .as_constant()
        .ok_or_else(|| Error::Seed("xi^-1 coefficient of M must be a constant".into()))?;
    if target.coeff(0, 0) != Poly::x() || target.ord().is_some_and(|o| o > 0) {
        return Err(Error::Seed("M must start as x + O(xi^-1)".into()));
    }
    let start = poisson_log_exp(&alpha0, &base);
    let mut x0 = Symbol::zero(policy);
    for k in 1..=depth as i32 {
        let level = -k - 1;
        if level < policy.xi_floor {
            break;
        }
        let current = poisson_exp(&x0, &start)?;
        let gap = &current.coeff(0, level) - &target.coeff(0, level);
        x0.add_term(Exp::new(0, -k), gap.scale(&rat(1, k as i64)));
        let check = poisson_exp(&x0, &start)?;
        if check.coeff(0, level) != target.coeff(0, level) {
            return Err(Error::Invariant(format!("matching at xi^{level} is not triangular")));
        }
    }
    Ok((x0, alpha0))
}

/// The Kontsevich seed, solved as deep as the policy allows.
pub fn kontsevich_bootstrap(policy: TruncationPolicy) -> Result<(Symbol, Rational)> {
    let depth = (-policy.xi_floor - 1).max(0) as usize;
    bootstrap_seed(&kontsevich_m_series(policy), depth)
}

/// `dL/dt_n - {B_n, L}` and the same for `M`, with `B_n = (L^n)_{>=0}`.
pub fn dkp_lax_residual(pair: &DispersionlessPair, n: u32) -> Result<(Symbol, Symbol)> {
    let policy = pair.l.policy();
    if policy.t_cap == 0 {
        return Err(Error::Domain("Lax residuals need t_cap >= 1".into()));
    }
    let b = pow(&pair.l, n).project(Range::NonNegative);
    let floor = policy.xi_floor + 2 + n as i32;
    let residual = |a: &Symbol| (&a.diff(Var::T(n)) - &poisson(&b, a)).truncate_t_below(policy.t_cap).cut_below(floor);
    Ok((residual(&pair.l), residual(&pair.m)))
}
