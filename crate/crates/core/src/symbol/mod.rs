//! Total symbols of microdifferential operators in the `(x, xi)` representation,
//! where `xi` stands for `hbar * d/dx`.
//!
//! A [`Symbol`] is a finite sparse map `(hbar^n, xi^m) -> Poly(x, t)`. Because `xi`
//! already carries its `hbar`, the hbar-grading of a term `hbar^n xi^m` is `-n`,
//! and the slice at hbar-order `-k` is the coefficient of `hbar^k`.

pub mod calculus;
pub mod format;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::algebra::{Poly, Rational, Var};

/// Where every computation cuts its formal series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TruncationPolicy {
    /// Most negative retained xi-exponent.
    pub xi_floor: i32,
    /// Highest retained hbar-exponent.
    pub hbar_cap: u32,
    /// Highest retained total degree in the times.
    pub t_cap: u32,
}

impl TruncationPolicy {
    pub const fn new(xi_floor: i32, hbar_cap: u32, t_cap: u32) -> Self {
        TruncationPolicy { xi_floor, hbar_cap, t_cap }
    }

    /// The coarser of two policies: what both operands can vouch for.
    pub fn meet(&self, other: &TruncationPolicy) -> TruncationPolicy {
        TruncationPolicy {
            xi_floor: self.xi_floor.max(other.xi_floor),
            hbar_cap: self.hbar_cap.min(other.hbar_cap),
            t_cap: self.t_cap.min(other.t_cap),
        }
    }

    /// Same policy with `extra` more xi-levels.
    pub fn deepen(&self, extra: u32) -> TruncationPolicy {
        TruncationPolicy { xi_floor: self.xi_floor - extra as i32, ..*self }
    }

    pub fn with_xi_floor(&self, xi_floor: i32) -> TruncationPolicy {
        TruncationPolicy { xi_floor, ..*self }
    }

    pub fn admits(&self, e: Exp) -> bool {
        e.xi >= self.xi_floor && e.h <= self.hbar_cap
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::new(-16, 6, 0)
    }
}

/// Exponent pair of a symbol term. Orders by hbar ascending, then xi descending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exp {
    pub h: u32,
    pub xi: i32,
}

impl Exp {
    pub const fn new(h: u32, xi: i32) -> Self {
        Exp { h, xi }
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.h.cmp(&other.h).then(other.xi.cmp(&self.xi))
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Which xi-exponents a projection keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Range {
    NonNegative,
    Negative,
}

/// Truncated total symbol. Equality compares terms only.
#[derive(Clone, Debug)]
pub struct Symbol {
    terms: BTreeMap<Exp, Poly>,
    policy: TruncationPolicy,
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Symbol {}

impl Symbol {
    pub fn zero(policy: TruncationPolicy) -> Self {
        Symbol { terms: BTreeMap::new(), policy }
    }

    /// Single term `coef * hbar^h * xi^xi`.
    pub fn term(policy: TruncationPolicy, h: u32, xi: i32, coef: Poly) -> Self {
        let mut s = Symbol::zero(policy);
        s.add_term(Exp::new(h, xi), coef);
        s
    }

    pub fn xi_pow(policy: TruncationPolicy, m: i32) -> Self {
        Symbol::term(policy, 0, m, Poly::one())
    }

    pub fn hbar(policy: TruncationPolicy) -> Self {
        Symbol::term(policy, 1, 0, Poly::one())
    }

    pub fn constant(policy: TruncationPolicy, coef: Poly) -> Self {
        Symbol::term(policy, 0, 0, coef)
    }

    pub fn x(policy: TruncationPolicy) -> Self {
        Symbol::constant(policy, Poly::x())
    }

    pub fn from_terms(policy: TruncationPolicy, terms: impl IntoIterator<Item = (Exp, Poly)>) -> Self {
        let mut s = Symbol::zero(policy);
        for (e, p) in terms {
            s.add_term(e, p);
        }
        s
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    /// Re-truncates to `policy`. Deepening is allowed but adds no information.
    pub fn with_policy(&self, policy: TruncationPolicy) -> Symbol {
        Symbol::from_terms(policy, self.terms.iter().map(|(e, p)| (*e, p.clone())))
    }

    /// Accumulates a term, dropping whatever the policy excludes.
    pub fn add_term(&mut self, e: Exp, coef: Poly) {
        if !self.policy.admits(e) || coef.is_zero() {
            return;
        }
        let coef = if coef.t_degree() > self.policy.t_cap { coef.truncate_t(self.policy.t_cap) } else { coef };
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Poly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, h: u32, xi: i32) -> Poly {
        self.terms.get(&Exp::new(h, xi)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Ordinary order in xi; `None` stands for minus infinity.
    pub fn ord(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.xi).max()
    }

    /// Lowest stored xi-exponent.
    pub fn min_xi(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.xi).min()
    }

    /// hbar-order: `xi` has order 0 and `hbar` order -1. `None` is minus infinity.
    pub fn ord_hbar(&self) -> Option<i32> {
        self.terms.keys().next().map(|e| -(e.h as i32))
    }

    pub fn max_h(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.h).max()
    }

    pub fn is_hbar_free(&self) -> bool {
        self.terms.keys().all(|e| e.h == 0)
    }

    /// The hbar-free symbol collecting the terms of hbar-order `l`.
    pub fn sigma(&self, l: i32) -> Symbol {
        if l > 0 {
            return Symbol::zero(self.policy);
        }
        let h = (-l) as u32;
        Symbol::from_terms(
            self.policy,
            self.terms.iter().filter(|(e, _)| e.h == h).map(|(e, p)| (Exp::new(0, e.xi), p.clone())),
        )
    }

    /// hbar-slices `[sigma(0), sigma(-1), .., sigma(-hbar_cap)]`.
    pub fn h_slices(&self) -> HExpansion {
        let mut slices = vec![Symbol::zero(self.policy); self.policy.hbar_cap as usize + 1];
        for (e, p) in &self.terms {
            slices[e.h as usize].add_term(Exp::new(0, e.xi), p.clone());
        }
        HExpansion(slices)
    }

    pub fn from_slices(policy: TruncationPolicy, slices: &HExpansion) -> Symbol {
        let mut s = Symbol::zero(policy);
        for (k, slice) in slices.0.iter().enumerate() {
            for (e, p) in slice.terms() {
                s.add_term(Exp::new(e.h + k as u32, e.xi), p.clone());
            }
        }
        s
    }

    pub fn project(&self, range: Range) -> Symbol {
        self.filter(|e| match range {
            Range::NonNegative => e.xi >= 0,
            Range::Negative => e.xi < 0,
        })
    }

    pub fn filter(&self, mut keep: impl FnMut(&Exp) -> bool) -> Symbol {
        Symbol {
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, p)| (*e, p.clone())).collect(),
            policy: self.policy,
        }
    }

    /// Drops all terms with xi-exponent below `floor` (the policy is kept).
    pub fn cut_below(&self, floor: i32) -> Symbol {
        self.filter(|e| e.xi >= floor)
    }

    pub fn scale(&self, c: &Rational) -> Symbol {
        if c.is_zero() {
            return Symbol::zero(self.policy);
        }
        Symbol { terms: self.terms.iter().map(|(e, p)| (*e, p.scale(c))).collect(), policy: self.policy }
    }

    /// Multiplies every coefficient by a polynomial (commutatively).
    pub fn scale_poly(&self, c: &Poly) -> Symbol {
        let mut out = Symbol::zero(self.policy);
        for (e, p) in &self.terms {
            out.add_term(*e, p.mul_truncated(c, self.policy.t_cap));
        }
        out
    }

    /// Multiplies by `hbar^k`, dropping what exceeds the cap.
    pub fn mul_hbar(&self, k: u32) -> Symbol {
        Symbol::from_terms(self.policy, self.terms.iter().map(|(e, p)| (Exp::new(e.h + k, e.xi), p.clone())))
    }

    /// Multiplies by `xi^k` (commutatively).
    pub fn mul_xi(&self, k: i32) -> Symbol {
        Symbol::from_terms(self.policy, self.terms.iter().map(|(e, p)| (Exp::new(e.h, e.xi + k), p.clone())))
    }

    pub fn diff_xi(&self) -> Symbol {
        self.diff_xi_n(1)
    }

    pub fn diff_xi_n(&self, k: u32) -> Symbol {
        let mut out = Symbol::zero(self.policy);
        for (e, p) in &self.terms {
            let f = crate::algebra::rational::falling_factorial(e.xi as i64, k);
            if f.is_zero() {
                continue;
            }
            out.add_term(Exp::new(e.h, e.xi - k as i32), p.scale(&Rational::from_integer(f)));
        }
        out
    }

    pub fn diff(&self, var: Var) -> Symbol {
        self.map_coeffs(|p| p.diff(var))
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Poly) -> Poly) -> Symbol {
        Symbol::from_terms(self.policy, self.terms.iter().map(|(e, p)| (*e, f(p))))
    }

    pub fn has_times(&self) -> bool {
        self.terms.values().any(Poly::has_times)
    }

    /// Highest total t-degree among coefficients.
    pub fn t_degree(&self) -> u32 {
        self.terms.values().map(Poly::t_degree).max().unwrap_or(0)
    }

    /// Re-truncates coefficients to t-degree `< t_bound`.
    pub fn truncate_t_below(&self, t_bound: u32) -> Symbol {
        if t_bound == 0 {
            return Symbol::zero(self.policy);
        }
        self.map_coeffs(|p| p.truncate_t(t_bound - 1))
    }

    fn combine(&self, other: &Symbol, sign: bool) -> Symbol {
        let mut out = Symbol { terms: self.terms.clone(), policy: self.policy.meet(&other.policy) };
        if out.policy != self.policy {
            out = self.with_policy(out.policy);
        }
        for (e, p) in &other.terms {
            out.add_term(*e, if sign { p.clone() } else { -p });
        }
        out
    }
}

impl std::ops::Add for &Symbol {
    type Output = Symbol;
    fn add(self, rhs: &Symbol) -> Symbol {
        self.combine(rhs, true)
    }
}

impl std::ops::Sub for &Symbol {
    type Output = Symbol;
    fn sub(self, rhs: &Symbol) -> Symbol {
        self.combine(rhs, false)
    }
}

impl std::ops::Add for Symbol {
    type Output = Symbol;
    fn add(self, rhs: Symbol) -> Symbol {
        &self + &rhs
    }
}

impl std::ops::Sub for Symbol {
    type Output = Symbol;
    fn sub(self, rhs: Symbol) -> Symbol {
        &self - &rhs
    }
}

impl std::ops::Neg for &Symbol {
    type Output = Symbol;
    fn neg(self) -> Symbol {
        Symbol { terms: self.terms.iter().map(|(e, p)| (*e, -p)).collect(), policy: self.policy }
    }
}

impl std::ops::Neg for Symbol {
    type Output = Symbol;
    fn neg(self) -> Symbol {
        -&self
    }
}

impl std::ops::AddAssign<&Symbol> for Symbol {
    fn add_assign(&mut self, rhs: &Symbol) {
        for (e, p) in &rhs.terms {
            self.add_term(*e, p.clone());
        }
    }
}

impl std::ops::SubAssign<&Symbol> for Symbol {
    fn sub_assign(&mut self, rhs: &Symbol) {
        for (e, p) in &rhs.terms {
            self.add_term(*e, -p);
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format::symbol_to_text(self))
    }
}

/// `sum_k hbar^k A_k` with every `A_k` hbar-free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HExpansion(pub Vec<Symbol>);

impl HExpansion {
    pub fn zero(policy: TruncationPolicy) -> Self {
        HExpansion(vec![Symbol::zero(policy); policy.hbar_cap as usize + 1])
    }

    pub fn get(&self, k: usize) -> Option<&Symbol> {
        self.0.get(k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Symbol::is_zero)
    }

    pub fn with_policy(&self, policy: TruncationPolicy) -> HExpansion {
        HExpansion(self.0.iter().take(policy.hbar_cap as usize + 1).map(|s| s.with_policy(policy)).collect())
    }

    pub fn cut_below(&self, floor: i32) -> HExpansion {
        HExpansion(self.0.iter().map(|s| s.cut_below(floor)).collect())
    }
}

/// `alpha(hbar) = sum_n hbar^n alpha_n` with constant coefficients.
/// Trailing zeros are insignificant for equality.
#[derive(Clone, Debug, Default)]
pub struct AlphaSeries(pub Vec<Rational>);

impl PartialEq for AlphaSeries {
    fn eq(&self, other: &Self) -> bool {
        let n = self.0.len().max(other.0.len());
        (0..n).all(|i| self.get(i) == other.get(i))
    }
}

impl Eq for AlphaSeries {}

impl AlphaSeries {
    pub fn zero() -> Self {
        AlphaSeries(Vec::new())
    }

    pub fn constant(a0: Rational) -> Self {
        AlphaSeries(vec![a0])
    }

    pub fn get(&self, n: usize) -> Rational {
        self.0.get(n).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn set(&mut self, n: usize, value: Rational) {
        if self.0.len() <= n {
            self.0.resize(n + 1, Rational::zero());
        }
        self.0[n] = value;
    }

    /// As a symbol `sum_n alpha_n hbar^n xi^0`.
    pub fn to_symbol(&self, policy: TruncationPolicy) -> Symbol {
        Symbol::from_terms(
            policy,
            self.0.iter().enumerate().map(|(n, a)| (Exp::new(n as u32, 0), Poly::constant(a.clone()))),
        )
    }

    pub fn trimmed(&self) -> AlphaSeries {
        let mut v = self.0.clone();
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
        AlphaSeries(v)
    }
}

/// `log_coef(hbar) * log xi + body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogSymbol {
    pub log_coef: AlphaSeries,
    pub body: Symbol,
}

impl LogSymbol {
    pub fn new(log_coef: AlphaSeries, body: Symbol) -> Self {
        LogSymbol { log_coef, body }
    }

    pub fn plain(body: Symbol) -> Self {
        LogSymbol { log_coef: AlphaSeries::zero(), body }
    }

    /// d/dxi, which turns `log xi` into `xi^-1`.
    pub fn diff_xi(&self) -> Symbol {
        let policy = self.body.policy();
        let mut out = self.body.diff_xi();
        for (n, a) in self.log_coef.0.iter().enumerate() {
            out.add_term(Exp::new(n as u32, -1), Poly::constant(a.clone()));
        }
        out.with_policy(policy)
    }

    pub fn is_zero(&self) -> bool {
        self.log_coef.is_zero() && self.body.is_zero()
    }
}
