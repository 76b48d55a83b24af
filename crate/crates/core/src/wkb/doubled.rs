//! Symbols on the doubled variables `(x, y, xi, eta)`.
//!
//! The WKB recursions differentiate in `xi` and in `y` separately, so nothing may
//! be restricted to the diagonal before the collection points. A term is keyed by
//! `(hbar, xi, eta, y)` exponents; the coefficient is a polynomial in `x` and the times.

use std::collections::BTreeMap;

use crate::algebra::{int, Poly, Rational};
use crate::symbol::{Exp, Symbol, TruncationPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DKey {
    pub h: u32,
    pub xi: i32,
    pub eta: i32,
    pub y: u32,
}

impl DKey {
    /// Total homogeneous degree in `(xi, eta)`.
    pub fn degree(&self) -> i32 {
        self.xi + self.eta
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubledSymbol {
    terms: BTreeMap<DKey, Poly>,
    policy: TruncationPolicy,
}

impl DoubledSymbol {
    pub fn zero(policy: TruncationPolicy) -> Self {
        DoubledSymbol { terms: BTreeMap::new(), policy }
    }

    /// `a(x, xi)`.
    pub fn left(a: &Symbol) -> Self {
        let mut out = DoubledSymbol::zero(a.policy());
        for (e, p) in a.terms() {
            out.add_term(DKey { h: e.h, xi: e.xi, eta: 0, y: 0 }, p.clone());
        }
        out
    }

    /// `b(y, eta)`.
    pub fn right(b: &Symbol) -> Self {
        let mut out = DoubledSymbol::zero(b.policy());
        for (e, p) in b.terms() {
            for (ye, rest) in p.split_x() {
                out.add_term(DKey { h: e.h, xi: 0, eta: e.xi, y: ye }, rest);
            }
        }
        out
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn admits(&self, k: &DKey) -> bool {
        k.degree() >= self.policy.xi_floor && k.h <= self.policy.hbar_cap
    }

    pub fn add_term(&mut self, k: DKey, coef: Poly) {
        if !self.admits(&k) || coef.is_zero() {
            return;
        }
        let coef = coef.truncate_t(self.policy.t_cap);
        if coef.is_zero() {
            return;
        }
        let slot = self.terms.entry(k).or_insert_with(Poly::zero);
        *slot += &coef;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DKey, &Poly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total `(xi, eta)`-degree present.
    pub fn ord(&self) -> Option<i32> {
        self.terms.keys().map(DKey::degree).max()
    }

    pub fn scale(&self, c: &Rational) -> DoubledSymbol {
        let mut out = DoubledSymbol::zero(self.policy);
        for (k, p) in &self.terms {
            out.add_term(*k, p.scale(c));
        }
        out
    }

    pub fn diff_xi(&self) -> DoubledSymbol {
        let mut out = DoubledSymbol::zero(self.policy);
        for (k, p) in &self.terms {
            if k.xi != 0 {
                out.add_term(DKey { xi: k.xi - 1, ..*k }, p.scale(&int(k.xi as i64)));
            }
        }
        out
    }

    pub fn diff_y(&self) -> DoubledSymbol {
        let mut out = DoubledSymbol::zero(self.policy);
        for (k, p) in &self.terms {
            if k.y != 0 {
                out.add_term(DKey { y: k.y - 1, ..*k }, p.scale(&int(k.y as i64)));
            }
        }
        out
    }

    /// `hbar^k` times `self`.
    pub fn mul_hbar(&self, k: u32) -> DoubledSymbol {
        let mut out = DoubledSymbol::zero(self.policy);
        for (key, p) in &self.terms {
            out.add_term(DKey { h: key.h + k, ..*key }, p.clone());
        }
        out
    }

    /// Pointwise product, truncated. Exact above the floor whenever neither factor
    /// has positive degree.
    pub fn mul(&self, other: &DoubledSymbol) -> DoubledSymbol {
        let mut out = DoubledSymbol::zero(self.policy);
        let floor = self.policy.xi_floor;
        for (ka, pa) in &self.terms {
            for (kb, pb) in &other.terms {
                let k = DKey { h: ka.h + kb.h, xi: ka.xi + kb.xi, eta: ka.eta + kb.eta, y: ka.y + kb.y };
                if k.degree() < floor || k.h > self.policy.hbar_cap {
                    continue;
                }
                out.add_term(k, pa.mul_truncated(pb, self.policy.t_cap));
            }
        }
        out
    }

    /// The part of homogeneous degree `-j`.
    pub fn homogeneous(&self, j: i32) -> DoubledSymbol {
        DoubledSymbol {
            terms: self.terms.iter().filter(|(k, _)| k.degree() == -j).map(|(k, p)| (*k, p.clone())).collect(),
            policy: self.policy,
        }
    }

    /// Restriction `y -> x`, `eta -> xi`.
    pub fn diagonal(&self) -> Symbol {
        let mut out = Symbol::zero(self.policy);
        for (k, p) in &self.terms {
            out.add_term(Exp::new(k.h, k.degree()), p.mul_x_pow(k.y));
        }
        out
    }

    /// Restriction `x -> y`, `xi -> eta` of the diagonal, i.e. the same function
    /// read in the right-hand variables.
    pub fn diagonal_right(&self) -> DoubledSymbol {
        DoubledSymbol::right(&self.diagonal())
    }
}

impl std::ops::AddAssign<&DoubledSymbol> for DoubledSymbol {
    fn add_assign(&mut self, rhs: &DoubledSymbol) {
        for (k, p) in &rhs.terms {
            self.add_term(*k, p.clone());
        }
    }
}

impl std::ops::SubAssign<&DoubledSymbol> for DoubledSymbol {
    fn sub_assign(&mut self, rhs: &DoubledSymbol) {
        for (k, p) in &rhs.terms {
            self.add_term(*k, -p.clone());
        }
    }
}

impl std::ops::Add for &DoubledSymbol {
    type Output = DoubledSymbol;
    fn add(self, rhs: &DoubledSymbol) -> DoubledSymbol {
        let mut out = self.clone();
        out += rhs;
        out
    }
}
