//! Campbell–Hausdorff series, Bernoulli coefficients, adjoint actions of
//! `exp(X/hbar)` and `xi^(alpha/hbar)`, and the `X_i <-> X~_i` maps.

use num_traits::{One, Zero};

use crate::algebra::rational::{binomial, int, inv_factorial};
use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::symbol::calculus::{
    ad_log_xi_over_hbar, commutator, commutator_over_hbar, mul, poisson, poisson_with_log_xi, series_exp,
};
use crate::symbol::{AlphaSeries, LogSymbol, Symbol};

/// `K_{2p} = B_{2p} / (2p)!`, the `z^{2p}` coefficient of `z/(e^z - 1)`.
pub fn bernoulli_k(p: u32) -> Rational {
    assert!(p >= 1, "K_2p is defined for p >= 1");
    todd_coefficients(2 * p as usize + 1).pop().unwrap()
}

/// Coefficients `B_n/n!` of `z/(e^z - 1)` for `n = 0..len`, from the recurrence
/// `sum_{k<=m} binom(m+1, k) B_k = 0`.
fn todd_coefficients(len: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(len);
    for m in 0..len as u32 {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        let mut acc = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += binomial(&int(m as i64 + 1), k as u32) * bk;
        }
        b.push(-acc / int(m as i64 + 1));
    }
    b.into_iter().enumerate().map(|(n, bn)| bn * inv_factorial(n as u32)).collect()
}

/// Terms `c_1..c_n` of `log(e^X e^Y) = sum c_k` by the bracket recursion, with an
/// arbitrary bracket. Index 0 of the result is `c_1`.
pub fn ch_terms_with(x: &Symbol, y: &Symbol, n: usize, bracket: impl Fn(&Symbol, &Symbol) -> Symbol) -> Vec<Symbol> {
    let mut c: Vec<Symbol> = Vec::with_capacity(n);
    if n == 0 {
        return c;
    }
    let sum = x + y;
    let diff = x - y;
    c.push(sum.clone());
    let half = Rational::new(1.into(), 2.into());
    for m in 1..n {
        // c_{m+1} = 1/(m+1) ( 1/2 [X - Y, c_m] + sum_p K_2p T_{2p}(m) )
        let mut next = bracket(&diff, &c[m - 1]).scale(&half);
        // nested[r][s]: sum over compositions of s into r parts of [c_k1, [.., [c_kr, X+Y]]]
        let max_r = m;
        let mut nested: Vec<Vec<Option<Symbol>>> = vec![vec![None; m + 1]; max_r + 1];
        nested[0][0] = Some(sum.clone());
        for r in 1..=max_r {
            for s in r..=m {
                let mut acc = Symbol::zero(sum.policy());
                for k in 1..=(s - (r - 1)) {
                    if let Some(inner) = &nested[r - 1][s - k] {
                        acc += &bracket(&c[k - 1], inner);
                    }
                }
                nested[r][s] = Some(acc);
            }
        }
        for p in 1..=(m / 2) {
            if let Some(t) = &nested[2 * p][m] {
                next += &t.scale(&bernoulli_k(p as u32));
            }
        }
        c.push(next.scale(&(Rational::one() / int(m as i64 + 1))));
    }
    c
}

/// Campbell–Hausdorff terms under the composition commutator.
pub fn ch_terms(x: &Symbol, y: &Symbol, n: usize) -> Vec<Symbol> {
    ch_terms_with(x, y, n, commutator)
}

/// `hbar * c_n(X/hbar, Y/hbar)`, i.e. the same recursion with `[., .]/hbar`, so that
/// `exp(X/hbar) exp(Y/hbar) = exp(sum_n c~_n / hbar)`.
pub fn ch_terms_scaled(x: &Symbol, y: &Symbol, n: usize) -> Vec<Symbol> {
    ch_terms_with(x, y, n, commutator_over_hbar)
}

fn require_negative(x: &Symbol, what: &str) -> Result<()> {
    match x.ord() {
        Some(o) if o >= 0 => Err(Error::Domain(format!("{what} must have order <= -1, found order {o}"))),
        _ => Ok(()),
    }
}

/// `Ad(exp(X/hbar)) target = sum_k ad(X/hbar)^k target / k!`.
pub fn adjoint_exp(x: &Symbol, target: &Symbol) -> Result<Symbol> {
    require_negative(x, "exponent of Ad(exp(X/hbar))")?;
    Ok(series_exp(target, |z| commutator_over_hbar(x, z)))
}

/// `Ad(xi^(alpha/hbar)) target = sum_k (alpha/hbar)^k ad(log xi)^k target / k!`.
pub fn adjoint_log_power(alpha: &AlphaSeries, target: &Symbol) -> Symbol {
    if alpha.is_zero() {
        return target.clone();
    }
    let a = alpha.to_symbol(target.policy());
    series_exp(target, |z| mul(&a, &ad_log_xi_over_hbar(z)))
}

/// `sum_{n>=0} coeffs[n] ad^n z` for `ad = {x0, .}`, stopping when `ad^n z` vanishes.
fn ad_series(x0: &Symbol, z: &Symbol, coeff: impl Fn(usize) -> Rational) -> Symbol {
    let mut out = z.clone();
    let mut power = z.clone();
    for n in 1usize.. {
        power = poisson(x0, &power);
        if power.is_zero() {
            break;
        }
        let c = coeff(n);
        if !c.is_zero() {
            out += &power.scale(&c);
        }
    }
    out
}

/// `exp(ad X0)(alpha log xi) - alpha log xi`, which has no log part.
fn dressed_log_tail(x0: &Symbol, alpha: &Rational) -> Symbol {
    if alpha.is_zero() {
        return Symbol::zero(x0.policy());
    }
    // sum_{k>=1} ad^{k-1}({X0, log xi})/k!
    let first = poisson_with_log_xi(x0);
    ad_series(x0, &first, |n| inv_factorial(n as u32 + 1)).scale(alpha)
}

/// Principal symbol of `alpha_i log xi + X~_i` from `X_i`:
/// `sum_{n>=1} ad^{n-1}/n! X_i + exp(ad X0)(alpha_i log xi)`, with `ad = {X0, .}`.
pub fn forward_tilde(x_i: &Symbol, x0: &Symbol, alpha_i: &Rational) -> Result<LogSymbol> {
    require_negative(x_i, "X_i")?;
    require_negative(x0, "X_0")?;
    let body = &ad_series(x0, x_i, |n| inv_factorial(n as u32 + 1)) + &dressed_log_tail(x0, alpha_i);
    Ok(LogSymbol::new(AlphaSeries::constant(alpha_i.clone()).trimmed(), body))
}

/// Inverse of [`forward_tilde`]: strips the dressed log tail to get `X~'_i`, then
/// applies `t/(e^t - 1)` at `t = ad X0`.
pub fn invert_tilde(tilde: &LogSymbol, x0: &Symbol) -> Result<(Rational, Symbol)> {
    require_negative(x0, "X_0")?;
    if tilde.log_coef.0.iter().skip(1).any(|c| !c.is_zero()) {
        return Err(Error::Domain("log coefficient must be hbar-free".into()));
    }
    if !tilde.body.is_hbar_free() {
        return Err(Error::Domain("X~_i must be hbar-free".into()));
    }
    let alpha = tilde.log_coef.get(0);
    let primed = &tilde.body - &dressed_log_tail(x0, &alpha);
    // ad^n X~' vanishes after about |floor|/2 steps; size the coefficient table for that.
    let span = (primed.ord().unwrap_or(0) - primed.policy().xi_floor).max(0) as usize + 2;
    let todd = todd_coefficients(span);
    let x_i = ad_series(x0, &primed, |n| todd.get(n).cloned().unwrap_or_else(Rational::zero));
    Ok((alpha, x_i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{poly, rat, Poly};
    use crate::symbol::{Exp, TruncationPolicy};
    use proptest::prelude::*;

    const P: TruncationPolicy = TruncationPolicy::new(-12, 4, 0);

    fn s(terms: &[(u32, i32, &str)]) -> Symbol {
        Symbol::from_terms(P, terms.iter().map(|(h, m, c)| (Exp::new(*h, *m), poly(c))))
    }

    /// Coefficients of `z/(e^z-1)` by inverting `sum z^n/(n+1)!` as a power series.
    fn inverse_series_oracle(len: usize) -> Vec<Rational> {
        let a: Vec<Rational> = (0..len).map(|n| inv_factorial(n as u32 + 1)).collect();
        let mut b = vec![Rational::zero(); len];
        b[0] = Rational::one();
        for n in 1..len {
            let mut acc = Rational::zero();
            for k in 1..=n {
                acc += &a[k] * &b[n - k];
            }
            b[n] = -acc;
        }
        b
    }

    #[test]
    fn k_values() {
        assert_eq!(bernoulli_k(1), rat(1, 12));
        assert_eq!(bernoulli_k(2), rat(-1, 720));
        assert_eq!(bernoulli_k(3), rat(1, 30240));
        let oracle = inverse_series_oracle(14);
        for p in 1..=6u32 {
            assert_eq!(bernoulli_k(p), oracle[2 * p as usize]);
        }
        assert_eq!(todd_coefficients(14), oracle);
        assert_eq!(todd_coefficients(2)[1], rat(-1, 2));
    }

    #[test]
    fn generating_function_identity() {
        for big_p in 1..6usize {
            let len = 2 * big_p + 2;
            let f: Vec<Rational> = (0..len).map(|n| inv_factorial(n as u32 + 1)).collect();
            let mut g = vec![Rational::zero(); len];
            g[0] = Rational::one();
            g[1] = rat(-1, 2);
            for p in 1..=big_p {
                g[2 * p] = bernoulli_k(p as u32);
            }
            for n in 0..=2 * big_p {
                let c: Rational = (0..=n).map(|k| &f[k] * &g[n - k]).sum();
                assert_eq!(c, if n == 0 { Rational::one() } else { Rational::zero() }, "order {n}");
            }
        }
    }

    #[test]
    fn ch_low_terms() {
        let x = s(&[(0, -1, "x")]);
        let y = s(&[(0, -2, "x^2"), (1, -1, "1")]);
        let c = ch_terms(&x, &y, 3);
        assert_eq!(c[0], &x + &y);
        assert_eq!(c[1], commutator(&x, &y).scale(&rat(1, 2)));
        // c_3 = (1/12)([X,[X,Y]] + [Y,[Y,X]])
        let xy = commutator(&x, &y);
        let c3 = (&commutator(&x, &xy) + &commutator(&y, &(-&xy))).scale(&rat(1, 12));
        assert_eq!(c[2], c3);
        assert!(ch_terms(&Symbol::zero(P), &Symbol::zero(P), 4).iter().all(Symbol::is_zero));
    }

    #[test]
    fn adjoint_examples() {
        let p = s(&[(0, 2, "1"), (0, 0, "x")]);
        assert_eq!(adjoint_exp(&Symbol::zero(P), &p).unwrap(), p);
        assert!(adjoint_exp(&s(&[(0, 0, "x")]), &p).is_err());
        let x = s(&[(0, 0, "x")]);
        assert_eq!(adjoint_log_power(&AlphaSeries::zero(), &x), x);
        let a0 = rat(3, 5);
        let out = adjoint_log_power(&AlphaSeries::constant(a0.clone()), &x);
        assert_eq!(out.cut_below(-1), &x + &Symbol::term(P, 0, -1, Poly::constant(a0.clone())));
        let xi3 = s(&[(0, 3, "1")]);
        assert_eq!(adjoint_log_power(&AlphaSeries(vec![a0, rat(1, 2)]), &xi3), xi3);
    }

    #[test]
    fn tilde_examples() {
        let xi_ = s(&[(0, -1, "x"), (0, -3, "2")]);
        let zero = Symbol::zero(P);
        let t = forward_tilde(&xi_, &zero, &rat(1, 3)).unwrap();
        assert_eq!(t.log_coef, AlphaSeries::constant(rat(1, 3)));
        assert_eq!(t.body, xi_);
        let self_br = s(&[(0, -1, "x")]);
        assert_eq!(forward_tilde(&self_br, &self_br, &Rational::zero()).unwrap().body, self_br);
        assert_eq!(invert_tilde(&t, &zero).unwrap(), (rat(1, 3), xi_));
    }

    fn arb_neg(hmax: u32) -> impl Strategy<Value = Symbol> {
        prop::collection::vec((0..=hmax, -6i32..=-1, 0u32..4, -4i64..5, 1i64..4), 0..4).prop_map(|ts| {
            Symbol::from_terms(P, ts.into_iter().map(|(h, m, e, n, d)| (Exp::new(h, m), Poly::x_pow(rat(n, d), e))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn tilde_roundtrip(x in arb_neg(0), x0 in arb_neg(0), n in -3i64..4, d in 1i64..4) {
            let alpha = rat(n, d);
            let t = forward_tilde(&x, &x0, &alpha).unwrap();
            let (a, back) = invert_tilde(&t, &x0).unwrap();
            prop_assert_eq!(a, alpha);
            prop_assert_eq!(back, x);
        }

        #[test]
        fn adjoint_exp_preserves_commutators(x in arb_neg(1), a in arb_neg(1), b in arb_neg(1)) {
            let xi = Symbol::xi_pow(P, 1);
            let a = &a + &xi;
            let lhs = commutator(&adjoint_exp(&x, &a).unwrap(), &adjoint_exp(&x, &b).unwrap());
            let rhs = adjoint_exp(&x, &commutator(&a, &b)).unwrap();
            // a carries xi^1, which pulls truncation error up by one level
            prop_assert_eq!(lhs.cut_below(P.xi_floor + 2), rhs.cut_below(P.xi_floor + 2));
        }
    }
}
