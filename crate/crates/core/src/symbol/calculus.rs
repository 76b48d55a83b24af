//! Composition, brackets and the xi-calculus on total symbols.
//!
//! The composition is `a o b = sum_k hbar^k / k! (d_xi^k a)(d_x^k b)`; every other
//! product here is a sub-sum of it (one value of `k`, or the antisymmetrised tail).

use num_traits::{One, Zero};

use super::{AlphaSeries, Exp, LogSymbol, Symbol, TruncationPolicy};
use crate::algebra::rational::{falling_factorial, int, inv_factorial};
use crate::algebra::{Poly, Rational, Var};
use crate::error::{Error, Result};

/// `d_x^k` of every term, computed lazily up to the x-degree.
struct XDerivs<'a> {
    terms: Vec<(Exp, Vec<Poly>)>,
    _src: std::marker::PhantomData<&'a Symbol>,
}

impl<'a> XDerivs<'a> {
    fn new(b: &'a Symbol, k_max: u32) -> Self {
        let terms = b
            .terms()
            .map(|(e, p)| {
                let top = p.degree_in(Var::X).min(k_max);
                let mut ds = Vec::with_capacity(top as usize + 1);
                ds.push(p.clone());
                for _ in 0..top {
                    let next = ds.last().unwrap().diff(Var::X);
                    ds.push(next);
                }
                (*e, ds)
            })
            .collect();
        XDerivs { terms, _src: std::marker::PhantomData }
    }
}

/// Adds `sign * sum_{k_min <= k <= k_max} hbar^(k - h_drop) / k! (d_xi^k a)(d_x^k b)` to `out`.
fn moyal_leg(a: &Symbol, b: &Symbol, k_min: u32, k_max: u32, h_drop: u32, negate: bool, out: &mut Symbol) {
    let policy = out.policy();
    let bd = XDerivs::new(b, k_max);
    for (ea, pa) in a.terms() {
        for (eb, derivs) in &bd.terms {
            for k in k_min..=k_max {
                let Some(dxb) = derivs.get(k as usize) else { break };
                let h = ea.h + eb.h + k - h_drop;
                let xi = ea.xi + eb.xi - k as i32;
                if h > policy.hbar_cap || xi < policy.xi_floor {
                    break;
                }
                let ff = falling_factorial(ea.xi as i64, k);
                if ff.is_zero() {
                    break;
                }
                let mut c = Rational::from_integer(ff) * inv_factorial(k);
                if negate {
                    c = -c;
                }
                let prod = pa.mul_truncated(dxb, policy.t_cap);
                out.add_term(Exp::new(h, xi), prod.scale(&c));
            }
        }
    }
}

fn joint(a: &Symbol, b: &Symbol) -> TruncationPolicy {
    a.policy().meet(&b.policy())
}

/// The composition of total symbols.
pub fn star(a: &Symbol, b: &Symbol) -> Symbol {
    let mut out = Symbol::zero(joint(a, b));
    moyal_leg(a, b, 0, u32::MAX, 0, false, &mut out);
    out
}

/// `a o b - b o a`.
pub fn commutator(a: &Symbol, b: &Symbol) -> Symbol {
    &star(a, b) - &star(b, a)
}

/// `(a o b - b o a) / hbar`, computed without ever forming `hbar^-1`: the `k = 0`
/// legs cancel, and every other leg carries at least one `hbar`.
pub fn commutator_over_hbar(a: &Symbol, b: &Symbol) -> Symbol {
    let mut out = Symbol::zero(joint(a, b));
    moyal_leg(a, b, 1, u32::MAX, 1, false, &mut out);
    moyal_leg(b, a, 1, u32::MAX, 1, true, &mut out);
    out
}

/// `{a, b} = d_xi a d_x b - d_x a d_xi b`, applied to every hbar-level.
pub fn poisson(a: &Symbol, b: &Symbol) -> Symbol {
    let mut out = Symbol::zero(joint(a, b));
    moyal_leg(a, b, 1, 1, 1, false, &mut out);
    moyal_leg(b, a, 1, 1, 1, true, &mut out);
    out
}

/// Pointwise (commutative) product of symbols.
pub fn mul(a: &Symbol, b: &Symbol) -> Symbol {
    let mut out = Symbol::zero(joint(a, b));
    moyal_leg(a, b, 0, 0, 0, false, &mut out);
    out
}

/// Commutative power `a^n`.
pub fn pow(a: &Symbol, n: u32) -> Symbol {
    let mut acc = Symbol::constant(a.policy(), Poly::one());
    for _ in 0..n {
        acc = mul(&acc, a);
    }
    acc
}

/// Composition power `a o a o ... o a`.
pub fn star_pow(a: &Symbol, n: u32) -> Symbol {
    let mut acc = Symbol::constant(a.policy(), Poly::one());
    for _ in 0..n {
        acc = star(&acc, a);
    }
    acc
}

/// Commutative inverse of a symbol whose top xi-term is an invertible constant.
///
/// The top term `c xi^m` is divided out and `(1 + u)^-1` expanded geometrically;
/// the expansion runs `|m|` levels deeper than the policy and is cut back at the end.
pub fn inverse(a: &Symbol) -> Result<Symbol> {
    let policy = a.policy();
    let m = a.ord().ok_or_else(|| Error::Domain("inverse of the zero symbol".into()))?;
    let lead = a.coeff(0, m);
    let c = lead.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| {
        Error::Domain(format!("leading coefficient `{lead}` of xi^{m} is not an invertible constant"))
    })?;
    let deep = policy.deepen(m.unsigned_abs());
    let cinv = Rational::one() / c;
    let mut u = a.with_policy(deep).mul_xi(-m).scale(&cinv);
    u.add_term(Exp::new(0, 0), Poly::constant(-Rational::one()));
    if u.terms().any(|(e, _)| e.xi >= 0 && e.h == 0) {
        return Err(Error::Domain("symbol is not dominated by its leading term".into()));
    }
    let neg_u = -&u;
    let mut sum = Symbol::constant(deep, Poly::one());
    let mut term = sum.clone();
    loop {
        term = mul(&term, &neg_u);
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    Ok(sum.mul_xi(-m).scale(&cinv).with_policy(policy))
}

/// `[log xi, a]` under the composition: `sum_{n>=1} hbar^n (-1)^(n-1)/n xi^-n d_x^n a`.
pub fn ad_log_xi(a: &Symbol) -> Symbol {
    log_xi_leg(a, 0)
}

/// `[log xi, a] / hbar`.
pub fn ad_log_xi_over_hbar(a: &Symbol) -> Symbol {
    log_xi_leg(a, 1)
}

fn log_xi_leg(a: &Symbol, h_drop: u32) -> Symbol {
    let policy = a.policy();
    let mut out = Symbol::zero(policy);
    for (e, p) in a.terms() {
        let mut d = p.clone();
        for n in 1u32.. {
            d = d.diff(Var::X);
            let h = e.h + n - h_drop;
            let xi = e.xi - n as i32;
            if d.is_zero() || h > policy.hbar_cap || xi < policy.xi_floor {
                break;
            }
            let sign = if n % 2 == 1 { 1 } else { -1 };
            out.add_term(Exp::new(h, xi), d.scale(&crate::algebra::rat(sign, n as i64)));
        }
    }
    out
}

/// `{X, log xi} = -xi^-1 d_x X`.
pub fn poisson_with_log_xi(x0: &Symbol) -> Symbol {
    -x0.diff(Var::X).mul_xi(-1)
}

/// Termwise xi-antiderivative; the `xi^-1` coefficient at each hbar-level becomes
/// the `log xi` coefficient and must be a constant.
pub fn integrate_xi(a: &Symbol) -> Result<LogSymbol> {
    let policy = a.policy();
    let mut body = Symbol::zero(policy);
    let mut log_coef = AlphaSeries::zero();
    for (e, p) in a.terms() {
        if e.xi >= 0 {
            return Err(Error::Domain(format!("xi-integration needs only negative powers, found xi^{}", e.xi)));
        }
        if e.xi == -1 {
            let c = p.as_constant().ok_or_else(|| {
                Error::NonConstantLog(format!("coefficient `{p}` of hbar^{} xi^-1 depends on x or t", e.h))
            })?;
            log_coef.set(e.h as usize, c);
        } else {
            body.add_term(Exp::new(e.h, e.xi + 1), p.scale(&(Rational::one() / int(e.xi as i64 + 1))));
        }
    }
    Ok(LogSymbol::new(log_coef.trimmed(), body))
}

fn check_negative(x0: &Symbol, what: &str) -> Result<()> {
    match x0.ord() {
        Some(o) if o >= 0 => Err(Error::Domain(format!("{what} must have order <= -1, found order {o}"))),
        _ => Ok(()),
    }
}

/// `exp(ad_{ } x0) target = sum_k {x0, .}^k target / k!`.
pub fn poisson_exp(x0: &Symbol, target: &Symbol) -> Result<Symbol> {
    check_negative(x0, "Poisson generator")?;
    Ok(series_exp(target, |z| poisson(x0, z)))
}

/// `sum_k op^k(target)/k!`, stopping at the first vanishing term. Callers guarantee
/// `op` strictly lowers the xi-order so the sum is finite under truncation.
pub(crate) fn series_exp(target: &Symbol, mut op: impl FnMut(&Symbol) -> Symbol) -> Symbol {
    let mut sum = target.clone();
    let mut term = target.clone();
    for k in 1u32.. {
        term = op(&term).scale(&(Rational::one() / int(k as i64)));
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{poly, rat};
    use crate::symbol::Range;
    use proptest::prelude::*;

    const P: TruncationPolicy = TruncationPolicy::new(-12, 4, 0);

    fn s(terms: &[(u32, i32, &str)]) -> Symbol {
        Symbol::from_terms(P, terms.iter().map(|(h, m, c)| (Exp::new(*h, *m), poly(c))))
    }

    #[test]
    fn star_examples() {
        assert_eq!(star(&s(&[(0, 1, "1")]), &s(&[(0, 0, "x")])), s(&[(0, 1, "x"), (1, 0, "1")]));
        assert_eq!(star(&s(&[(0, -1, "x")]), &s(&[(0, -1, "x")])), s(&[(0, -2, "x^2"), (1, -3, "-x")]));
        assert_eq!(star(&s(&[(0, 0, "x")]), &s(&[(0, 1, "1")])), s(&[(0, 1, "x")]));
    }

    #[test]
    fn commutator_examples() {
        let xi = s(&[(0, 1, "1")]);
        let x = s(&[(0, 0, "x")]);
        assert_eq!(commutator(&xi, &x), s(&[(1, 0, "1")]));
        assert_eq!(commutator_over_hbar(&xi, &x), s(&[(0, 0, "1")]));
        assert_eq!(commutator_over_hbar(&s(&[(0, 2, "1")]), &x), s(&[(0, 1, "2")]));
    }

    #[test]
    fn poisson_examples() {
        let p0 = s(&[(0, 2, "1"), (0, 0, "x")]);
        let q0 = s(&[(0, 1, "-1")]);
        assert_eq!(poisson(&p0, &q0), s(&[(0, 0, "1")]));
        assert!(poisson(&p0, &p0).is_zero());
        assert_eq!(poisson(&s(&[(0, 1, "1")]), &s(&[(0, 0, "x")])), s(&[(0, 0, "1")]));
    }

    #[test]
    fn project_examples() {
        let a = s(&[(0, 2, "1"), (0, 0, "x"), (1, -1, "1")]);
        assert_eq!(a.project(Range::NonNegative), s(&[(0, 2, "1"), (0, 0, "x")]));
        assert!(s(&[(0, 2, "1"), (0, 0, "x")]).project(Range::Negative).is_zero());
        assert_eq!(s(&[(0, -1, "x")]).project(Range::Negative), s(&[(0, -1, "x")]));
    }

    #[test]
    fn log_xi_examples() {
        assert_eq!(ad_log_xi(&s(&[(0, 0, "x")])), s(&[(1, -1, "1")]));
        assert!(ad_log_xi(&s(&[(0, 3, "1")])).is_zero());
        assert_eq!(ad_log_xi(&s(&[(0, 0, "x^2")])), s(&[(1, -1, "2*x"), (2, -2, "-1")]));
    }

    #[test]
    fn integrate_examples() {
        let r = integrate_xi(&s(&[(0, -1, "3"), (0, -2, "5")])).unwrap();
        assert_eq!(r.log_coef, AlphaSeries(vec![int(3)]));
        assert_eq!(r.body, s(&[(0, -1, "-5")]));
        assert!(matches!(integrate_xi(&s(&[(0, -1, "x")])), Err(Error::NonConstantLog(_))));
        assert!(matches!(integrate_xi(&s(&[(0, 0, "1")])), Err(Error::Domain(_))));
    }

    #[test]
    fn orders_and_slices() {
        let a = s(&[(0, 2, "1"), (0, 0, "x"), (1, -1, "1/2")]);
        assert_eq!(a.ord(), Some(2));
        assert_eq!(Symbol::zero(P).ord(), None);
        assert_eq!(s(&[(1, 1, "1")]).ord(), Some(1));
        assert_eq!(s(&[(1, 0, "1")]).ord_hbar(), Some(-1));
        assert_eq!(s(&[(0, 1, "1")]).ord_hbar(), Some(0));
        assert_eq!(s(&[(1, 1, "1")]).ord_hbar(), Some(-1));
        assert_eq!(a.sigma(0), s(&[(0, 2, "1"), (0, 0, "x")]));
        assert_eq!(a.sigma(-1), s(&[(0, -1, "1/2")]));
        assert!(a.sigma(1).is_zero());
        assert_eq!(Symbol::from_slices(P, &a.h_slices()), a);
    }

    #[test]
    fn inverse_of_shifted_xi() {
        let l = s(&[(0, 1, "1"), (0, -1, "1/2*x")]);
        let inv = inverse(&l).unwrap();
        assert_eq!(mul(&l, &inv).cut_below(P.xi_floor + 2), s(&[(0, 0, "1")]));
        assert!(inverse(&s(&[(0, 1, "x")])).is_err());
    }

    #[test]
    fn poisson_exp_trivial() {
        let xi = s(&[(0, 1, "1")]);
        assert_eq!(poisson_exp(&Symbol::zero(P), &xi).unwrap(), xi);
        assert!(poisson_exp(&xi, &xi).is_err());
    }

    fn arb_symbol(hmax: u32, xi_lo: i32, xi_hi: i32) -> impl Strategy<Value = Symbol> {
        prop::collection::vec((0..=hmax, xi_lo..=xi_hi, 0u32..3, -4i64..5, 1i64..4), 0..5).prop_map(|ts| {
            Symbol::from_terms(P, ts.into_iter().map(|(h, m, e, n, d)| (Exp::new(h, m), Poly::x_pow(rat(n, d), e))))
        })
    }

    proptest! {
        #[test]
        fn classical_limit_of_commutator(a in arb_symbol(2, -3, 2), b in arb_symbol(2, -3, 2)) {
            let lhs = commutator_over_hbar(&a, &b).sigma(0);
            let rhs = poisson(&a.sigma(0), &b.sigma(0));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn commutator_is_hbar_times_bracket(a in arb_symbol(2, -3, 2), b in arb_symbol(2, -3, 2)) {
            prop_assert_eq!(commutator(&a, &b), commutator_over_hbar(&a, &b).mul_hbar(1));
        }

        #[test]
        fn sigma_homomorphism(a in arb_symbol(2, -3, 2), b in arb_symbol(2, -3, 2)) {
            prop_assert_eq!(star(&a, &b).sigma(0), mul(&a.sigma(0), &b.sigma(0)));
        }

        #[test]
        fn star_associative_with_guard(a in arb_symbol(1, -2, 2), b in arb_symbol(1, -2, 2), c in arb_symbol(1, -2, 2)) {
            let guard = 2 * [&a, &b, &c].iter().filter_map(|s| s.ord()).max().unwrap_or(0).max(0) as u32;
            let deep = P.deepen(guard);
            let (a2, b2, c2) = (a.with_policy(deep), b.with_policy(deep), c.with_policy(deep));
            let l = star(&star(&a2, &b2), &c2).with_policy(P);
            let r = star(&a2, &star(&b2, &c2)).with_policy(P);
            prop_assert_eq!(l, r);
        }

        #[test]
        fn projections_partition(a in arb_symbol(2, -4, 3)) {
            let pos = a.project(Range::NonNegative);
            let neg = a.project(Range::Negative);
            prop_assert_eq!(&(&pos + &neg), &a);
            prop_assert_eq!(pos.project(Range::NonNegative), pos);
        }

        #[test]
        fn integrate_then_differentiate(a in arb_symbol(0, -6, -1)) {
            let a = a.filter(|e| e.xi != -1) + Symbol::term(P, 0, -1, Poly::constant(rat(2, 3)));
            let integ = integrate_xi(&a).unwrap();
            prop_assert_eq!(integ.diff_xi(), a);
        }
    }
}
