//! Independent ground truth shared by the integration tests.
//!
//! `Laurent` is a deliberately naive symbol type that allows negative powers of
//! hbar, with its own composition product and formal exp/log. It shares nothing
//! with the engine beyond the polynomial coefficients.

#![allow(dead_code)]

pub mod strategies;

use std::collections::BTreeMap;

use hkp_core::algebra::{int, Poly, Rational, Var};
use hkp_core::symbol::{Exp, Symbol, TruncationPolicy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laurent {
    /// `(hbar exponent, xi exponent) -> coefficient`.
    pub terms: BTreeMap<(i32, i32), Poly>,
    pub xi_floor: i32,
    pub h_cap: i32,
    /// Every factor ever multiplied in has `h >= xi`, so a term at `(h, m)` can lose
    /// at most `m - xi_floor` powers of hbar on the way down; drop it when even that
    /// leaves it above the cap at `xi^0`.
    pub slope: bool,
}

fn falling(m: i32, n: u32) -> Rational {
    (0..n as i32).map(|i| int((m - i) as i64)).product()
}

fn fact(n: u32) -> Rational {
    (1..=n as i64).map(int).product()
}

impl Laurent {
    pub fn zero(xi_floor: i32, h_cap: i32) -> Self {
        Laurent { terms: BTreeMap::new(), xi_floor, h_cap, slope: false }
    }

    pub fn one(xi_floor: i32, h_cap: i32) -> Self {
        let mut out = Laurent::zero(xi_floor, h_cap);
        out.add((0, 0), Poly::one());
        out
    }

    /// `hbar^shift * s`.
    pub fn from_symbol(s: &Symbol, shift: i32, xi_floor: i32, h_cap: i32) -> Self {
        let mut out = Laurent::zero(xi_floor, h_cap);
        for (e, p) in s.terms() {
            out.add((e.h as i32 + shift, e.xi), p.clone());
        }
        out
    }

    fn empty(&self) -> Laurent {
        Laurent { slope: self.slope, ..Laurent::zero(self.xi_floor, self.h_cap) }
    }

    fn unit(&self) -> Laurent {
        let mut one = self.empty();
        one.add((0, 0), Poly::one());
        one
    }

    pub fn with_slope(mut self) -> Laurent {
        self.slope = true;
        self
    }

    pub fn add(&mut self, key: (i32, i32), p: Poly) {
        if key.1 < self.xi_floor || key.0 > self.h_cap || p.is_zero() {
            return;
        }
        if self.slope && key.0 > self.h_cap + key.1 {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(Poly::zero);
        *slot += &p;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn plus(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (k, p) in &other.terms {
            out.add(*k, p.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Laurent {
        let mut out = self.empty();
        for (k, p) in &self.terms {
            out.add(*k, p.scale(c));
        }
        out
    }

    /// Composition: `sum_n hbar^n / n! d_xi^n a d_x^n b`, term by term.
    pub fn compose(&self, other: &Laurent) -> Laurent {
        let mut out = self.empty();
        for (&(h1, m1), p1) in &self.terms {
            for (&(h2, m2), p2) in &other.terms {
                let mut n = 0u32;
                loop {
                    let xi = m1 + m2 - n as i32;
                    if xi < self.xi_floor {
                        break;
                    }
                    let c = falling(m1, n) / fact(n);
                    if c == Rational::from_integer(0.into()) {
                        break;
                    }
                    let d = p2.diff_n(Var::X, n);
                    if d.is_zero() {
                        break;
                    }
                    out.add((h1 + h2 + n as i32, xi), (p1 * &d).scale(&c));
                    n += 1;
                }
            }
        }
        out
    }

    /// Pointwise (commutative) product.
    pub fn times(&self, other: &Laurent) -> Laurent {
        let mut out = self.empty();
        for (&(h1, m1), p1) in &self.terms {
            for (&(h2, m2), p2) in &other.terms {
                out.add((h1 + h2, m1 + m2), p1 * p2);
            }
        }
        out
    }

    fn power_series(
        &self,
        coeffs: impl Fn(u32) -> Rational,
        product: impl Fn(&Laurent, &Laurent) -> Laurent,
    ) -> Laurent {
        let mut out = self.empty();
        let mut power = self.unit();
        for k in 0..=(-self.xi_floor + 1) as u32 {
            if power.terms.is_empty() {
                break;
            }
            out = out.plus(&power.scale(&coeffs(k)));
            power = product(&power, self);
        }
        out
    }

    /// `sum_k self^(o k) / k!`; `self` must have negative xi-order.
    pub fn exp_compose(&self) -> Laurent {
        self.power_series(|k| Rational::from_integer(1.into()) / fact(k), Laurent::compose)
    }

    pub fn exp_times(&self) -> Laurent {
        self.power_series(|k| Rational::from_integer(1.into()) / fact(k), Laurent::times)
    }

    /// `log(1 + u)` with `u = self - 1` under the given product.
    fn log_with(&self, product: impl Fn(&Laurent, &Laurent) -> Laurent) -> Laurent {
        let mut u = self.clone();
        u.add((0, 0), -Poly::one());
        let series = |k: u32| {
            if k == 0 {
                Rational::from_integer(0.into())
            } else {
                let s = if k % 2 == 1 { 1 } else { -1 };
                Rational::new(s.into(), (k as i64).into())
            }
        };
        u.power_series(series, product)
    }

    /// Terms at `xi^m` only.
    fn level(&self, m: i32) -> Laurent {
        let mut out = self.empty();
        for (&(h, k), p) in &self.terms {
            if k == m {
                out.add((h, k), p.clone());
            }
        }
        out
    }

    /// Commutative `log`, for `self = 1 + (negative xi-powers)`. Solves
    /// `xi d_xi e = e * xi d_xi phi` one xi-level at a time:
    /// `m phi_m = m e_m - sum_{m < j < 0} j phi_j e_(m-j)`.
    pub fn log_times(&self) -> Laurent {
        assert_eq!(self.level(0), self.unit(), "log_times needs a unit constant term");
        assert!(self.terms.keys().all(|k| k.1 <= 0));
        let mut phi: Vec<Laurent> = Vec::new(); // phi[i] at xi^-(i+1)
        for m in (self.xi_floor..=-1).rev() {
            let mut acc = self.level(m).scale(&int(m as i64));
            for j in (m + 1)..=-1 {
                let term = phi[(-j - 1) as usize].times(&self.level(m - j)).scale(&int(-j as i64));
                acc = acc.plus(&term);
            }
            phi.push(acc.scale(&(Rational::from_integer(1.into()) / int(m as i64))));
        }
        phi.iter().fold(self.empty(), |a, b| a.plus(b))
    }

    pub fn log_compose(&self) -> Laurent {
        self.log_with(Laurent::compose)
    }

    pub fn cut_below(&self, floor: i32) -> Laurent {
        let mut out = self.empty();
        for (&k, p) in &self.terms {
            if k.1 >= floor {
                out.add(k, p.clone());
            }
        }
        out
    }

    pub fn min_h(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.0).min()
    }

    /// Back to a symbol after multiplying by `hbar^shift`; panics on negative powers.
    pub fn to_symbol(&self, shift: i32, policy: TruncationPolicy) -> Symbol {
        let mut out = Symbol::zero(policy);
        for (&(h, m), p) in &self.terms {
            let h = h + shift;
            assert!(h >= 0, "negative hbar power {h} at xi^{m} survived");
            out.add_term(Exp::new(h as u32, m), p.clone());
        }
        out
    }
}

/// Working window for hbar: terms of a product of negative-order factors landing
/// at or above the floor have every factor's hbar-exponent within `cap + |floor|`.
pub fn laurent_window(policy: TruncationPolicy) -> (i32, i32) {
    (policy.xi_floor, policy.hbar_cap as i32 + 1 - policy.xi_floor)
}

/// `hbar log sigma_tot(exp(X/hbar))`, summed termwise and logged commutatively.
pub fn brute_force_phase(x: &Symbol) -> Symbol {
    let policy = x.policy();
    let (floor, cap) = laurent_window(policy);
    let e = Laurent::from_symbol(x, -1, floor, cap).with_slope().exp_compose();
    e.log_times().to_symbol(1, policy)
}

/// `log(e^X o e^Y)` with the operator logarithm, for `ord X, ord Y <= -1`.
pub fn brute_force_ch(x: &Symbol, y: &Symbol) -> Symbol {
    let policy = x.policy();
    let (floor, cap) = laurent_window(policy);
    let ex = Laurent::from_symbol(x, 0, floor, cap).with_slope().exp_compose();
    let ey = Laurent::from_symbol(y, 0, floor, cap).with_slope().exp_compose();
    ex.compose(&ey).log_compose().to_symbol(0, policy)
}

/// `c exp(r/hbar)` expanded, for comparing exponential products.
pub fn expand_exp_symbol(amp: &Symbol, phase: &Symbol) -> Laurent {
    let policy = amp.policy();
    let (floor, cap) = laurent_window(policy);
    let a = Laurent::from_symbol(amp, 0, floor, cap);
    a.times(&Laurent::from_symbol(phase, -1, floor, cap).exp_times())
}
