//! Small random inputs shared by the property tests.

use hkp_core::algebra::{rat, Monomial, Poly, Var};
use hkp_core::symbol::{Exp, HExpansion, Symbol, TruncationPolicy};
use proptest::prelude::*;

/// `a x^e + b/2 x^f` with small integer data.
pub fn coef() -> impl Strategy<Value = Poly> {
    (-3i64..=3, 0u32..=2, -2i64..=2, 0u32..=1)
        .prop_map(|(a, e, b, f)| Poly::x_pow(rat(a, 1), e) + Poly::x_pow(rat(b, 2), f))
}

/// At most `len` terms `h^h xi^m c` with `h <= hmax` and `lo <= m <= hi`.
pub fn symbol(policy: TruncationPolicy, hmax: u32, lo: i32, hi: i32, len: usize) -> impl Strategy<Value = Symbol> {
    prop::collection::vec((0..=hmax, lo..=hi, coef()), 0..=len)
        .prop_map(move |ts| Symbol::from_terms(policy, ts.into_iter().map(|(h, m, c)| (Exp::new(h, m), c))))
}

/// hbar-free, strictly negative xi-order.
pub fn negative(policy: TruncationPolicy, lo: i32) -> impl Strategy<Value = Symbol> {
    symbol(policy, 0, lo, -1, 3)
}

pub fn expansion(policy: TruncationPolicy, levels: usize) -> impl Strategy<Value = HExpansion> {
    prop::collection::vec(negative(policy, -4), levels).prop_map(HExpansion)
}

pub fn small_rational() -> impl Strategy<Value = hkp_core::algebra::Rational> {
    (-3i64..=3, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

/// Polynomial in `t_1, t_2, t_3` of total degree at most 4.
pub fn t_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((1u32..=3, 0u32..=2, 0u32..=1, -4i64..=4), 1..4).prop_map(|ts| {
        let mut p = Poly::zero();
        for (a, b, c, k) in ts {
            let m = Monomial::var(Var::T(1), a).mul(&Monomial::var(Var::T(2), b)).mul(&Monomial::var(Var::T(3), c));
            if m.t_degree() <= 4 {
                p.add_term(m, rat(k, 3));
            }
        }
        p
    })
}
