//! Passing between exponential operators `exp(X/hbar)` and WKB phases `exp(S/hbar)`.
//!
//! [`x_to_s`] and [`s_to_x`] run the doubled-variable recursions level by level;
//! both check their vanishing guards as they go instead of assuming them.

pub mod doubled;

use std::collections::HashMap;

use crate::algebra::rat;
use crate::error::{Error, Result};
use crate::solver::zeta;
use crate::symbol::format::symbol_to_text;
use crate::symbol::{AlphaSeries, Exp, HExpansion, LogSymbol, Range, Symbol, TruncationPolicy};
pub use doubled::{DKey, DoubledSymbol};

/// `S = sum_n hbar^n S_n`, every slice hbar-free with only negative powers of xi.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WKBPhase {
    pub slices: Vec<Symbol>,
}

impl WKBPhase {
    pub fn new(slices: Vec<Symbol>) -> Result<Self> {
        for (n, s) in slices.iter().enumerate() {
            check_slice(s, n, "S")?;
        }
        Ok(WKBPhase { slices })
    }

    pub fn zero(policy: TruncationPolicy, levels: usize) -> Self {
        WKBPhase { slices: vec![Symbol::zero(policy); levels] }
    }

    /// Splits an hbar-dependent symbol into its slices.
    pub fn from_symbol(s: &Symbol) -> Result<Self> {
        WKBPhase::new(s.h_slices().0)
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.slices.first().map(Symbol::policy).unwrap_or_default()
    }

    pub fn to_symbol(&self) -> Symbol {
        Symbol::from_slices(self.policy(), &HExpansion(self.slices.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.slices.iter().all(Symbol::is_zero)
    }

    pub fn cut_below(&self, floor: i32) -> WKBPhase {
        WKBPhase { slices: self.slices.iter().map(|s| s.cut_below(floor)).collect() }
    }

    /// One `[S_n]` block per slice.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (n, s) in self.slices.iter().enumerate() {
            out.push_str(&format!("[S_{n}]\n{}", symbol_to_text(s)));
        }
        out
    }
}

fn check_slice(s: &Symbol, n: usize, name: &str) -> Result<()> {
    if !s.is_hbar_free() {
        return Err(Error::Domain(format!("{name}_{n} must be hbar-free")));
    }
    if !s.project(Range::NonNegative).is_zero() {
        return Err(Error::Domain(format!("{name}_{n} has non-negative powers of xi")));
    }
    Ok(())
}

/// `c exp(r/hbar)`, the phase kept undivided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpSymbol {
    pub amp: Symbol,
    pub phase: Symbol,
}

impl ExpSymbol {
    pub fn new(amp: Symbol, phase: Symbol) -> Self {
        ExpSymbol { amp, phase }
    }

    pub fn pure_phase(phase: Symbol) -> Self {
        ExpSymbol { amp: Symbol::constant(phase.policy(), crate::algebra::Poly::one()), phase }
    }
}

/// How many times each vanishing guard was checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GuardReport {
    /// `Y` computed one step past its last allowed index and found zero.
    pub vanishing: usize,
    /// `Y` found to satisfy its xi-order bound.
    pub order: usize,
}

/// The product `(a.amp e^{a.phase/hbar}) o (b.amp e^{b.phase/hbar})`.
///
/// Runs the `w`/`psi` recursions of the flow `d_t pi = hbar d_xi d_y pi` and sums
/// them at `t = 1`. Phases must have `ord <= 0`.
pub fn exp_product(a: &ExpSymbol, b: &ExpSymbol) -> Result<ExpSymbol> {
    for (p, name) in [(&a.phase, "left"), (&b.phase, "right")] {
        if p.ord().is_some_and(|o| o > 0) {
            return Err(Error::Domain(format!("{name} phase has positive xi-order")));
        }
    }
    let policy = a.amp.policy().meet(&b.amp.policy()).meet(&a.phase.policy()).meet(&b.phase.policy());
    let floor = policy.xi_floor;
    let top = a.amp.ord().unwrap_or(0) + b.amp.ord().unwrap_or(0);
    // w multiplies psi terms of degree up to `top`, so it is carried deeper.
    let w_policy = policy.deepen(top.max(0) as u32);
    let w0 =
        &DoubledSymbol::left(&a.phase.with_policy(w_policy)) + &DoubledSymbol::right(&b.phase.with_policy(w_policy));
    let psi0 = DoubledSymbol::left(&a.amp.with_policy(policy)).mul(&DoubledSymbol::right(&b.amp.with_policy(policy)));

    let mut w = vec![w0];
    let mut dxi_w = vec![w[0].diff_xi()];
    let mut dy_w = vec![w[0].diff_y()];
    for k in 0..(-w_policy.xi_floor) as usize {
        let mut next = w[k].diff_xi().diff_y().mul_hbar(1);
        for nu in 0..=k {
            next += &dxi_w[nu].mul(&dy_w[k - nu]);
        }
        let next = next.scale(&rat(1, k as i64 + 1));
        dxi_w.push(next.diff_xi());
        dy_w.push(next.diff_y());
        w.push(next);
    }

    let mut psi = vec![psi0];
    let mut dxi_psi = vec![psi[0].diff_xi()];
    let mut dy_psi = vec![psi[0].diff_y()];
    let steps = (top.max(0) - floor) as usize;
    for k in 0..steps {
        let mut next = psi[k].diff_xi().diff_y().mul_hbar(1);
        for nu in 0..=k {
            if let Some(wk) = dy_w.get(k - nu) {
                next += &dxi_psi[nu].mul(wk);
                next += &dy_psi[nu].mul(&dxi_w[k - nu]);
            }
        }
        let next = next.scale(&rat(1, k as i64 + 1));
        dxi_psi.push(next.diff_xi());
        dy_psi.push(next.diff_y());
        psi.push(next);
    }

    let mut amp = Symbol::zero(policy);
    for p in &psi {
        amp += &p.diagonal().with_policy(policy);
    }
    let mut phase = Symbol::zero(policy);
    for wk in &w {
        phase += &wk.diagonal().with_policy(policy);
    }
    Ok(ExpSymbol { amp, phase })
}

fn check_x_input(x: &HExpansion) -> Result<TruncationPolicy> {
    for (n, s) in x.iter().enumerate() {
        if !s.is_hbar_free() {
            return Err(Error::Domain(format!("X_{n} must be hbar-free")));
        }
        if s.ord().is_some_and(|o| o > -1) {
            return Err(Error::Domain(format!("X_{n} has non-negative powers of xi")));
        }
    }
    Ok(x.get(0).map(Symbol::policy).unwrap_or_default())
}

/// The phase `S` with `sigma_tot(exp(X/hbar)) = exp(S/hbar)`.
pub fn x_to_s(x: &HExpansion) -> Result<WKBPhase> {
    x_to_s_traced(x).map(|(s, _)| s)
}

/// [`x_to_s`] together with a tally of the guard checks it performed.
pub fn x_to_s_traced(x: &HExpansion) -> Result<(WKBPhase, GuardReport)> {
    let policy = check_x_input(x)?;
    let levels = x.len();
    if levels == 0 {
        return Ok((WKBPhase { slices: vec![] }, GuardReport::default()));
    }
    let depth = (-policy.xi_floor).max(0) as usize;
    let mut report = GuardReport::default();

    // y[l][m][k] = Y_{k,m}^{(l)}; s_parts[l][m] = S_m^{(l)} in the right variables,
    // already differentiated in y.
    let mut y: Vec<Vec<Vec<DoubledSymbol>>> = Vec::new();
    let mut dy_s: Vec<Vec<DoubledSymbol>> = vec![vec![DoubledSymbol::zero(policy); levels]];
    let mut total = vec![Symbol::zero(policy); levels];

    for l in 0..depth {
        let mut level: Vec<Vec<DoubledSymbol>> = Vec::with_capacity(levels);
        let mut next_s = Vec::with_capacity(levels);
        for m in 0..levels {
            let y0 = if l == 0 { DoubledSymbol::left(&x.0[m]) } else { DoubledSymbol::zero(policy) };
            let mut chain = vec![y0];
            let last = l + m;
            for k in 0..=last {
                let mut next = DoubledSymbol::zero(policy);
                if m > 0 {
                    if let Some(prev) = level[m - 1].get(k) {
                        next += &prev.diff_xi().diff_y();
                    }
                }
                for (lp, yl) in y.iter().enumerate() {
                    for mp in 0..=m {
                        if let Some(ykm) = yl[mp].get(k) {
                            if !ykm.is_zero() {
                                next += &ykm.diff_xi().mul(&dy_s[l - lp][m - mp]);
                            }
                        }
                    }
                }
                let next = next.scale(&rat(1, k as i64 + 1));
                if k == last {
                    if !next.is_zero() {
                        return Err(Error::Invariant(format!("Y_{{{},{m}}}^({l}) does not vanish", k + 1)));
                    }
                    report.vanishing += 1;
                } else {
                    chain.push(next);
                }
            }
            for (k, yk) in chain.iter().enumerate() {
                if let Some(o) = yk.ord() {
                    if o > -(k as i32) - (l as i32) - 1 {
                        return Err(Error::Invariant(format!("Y_{{{k},{m}}}^({l}) has xi-order {o}")));
                    }
                }
                report.order += 1;
            }
            let mut s = Symbol::zero(policy);
            for yk in &chain {
                s += &yk.diagonal();
            }
            let s = s.scale(&rat(1, l as i64 + 1));
            total[m] += &s;
            next_s.push(DoubledSymbol::right(&s).diff_y());
            level.push(chain);
        }
        y.push(level);
        dy_s.push(next_s);
    }
    Ok((WKBPhase { slices: total }, report))
}

/// The exponent `X` with `sigma_tot(exp(X/hbar)) = exp(S/hbar)`, built degree by degree.
pub fn s_to_x(s: &WKBPhase) -> Result<HExpansion> {
    s_to_x_traced(s).map(|(x, _)| x)
}

#[allow(clippy::needless_range_loop)] // the indices are the recurrence's own
pub fn s_to_x_traced(s: &WKBPhase) -> Result<(HExpansion, GuardReport)> {
    for (n, sl) in s.slices.iter().enumerate() {
        check_slice(sl, n, "S")?;
    }
    let policy = s.policy();
    let levels = s.slices.len();
    let degrees = (-policy.xi_floor).max(0) as usize;
    let mut report = GuardReport::default();

    // Y_{k,m,j}^{(l)} keyed by (l, k, m, j); zero entries are not stored.
    let mut y: HashMap<(usize, usize, usize, usize), DoubledSymbol> = HashMap::new();
    // d_y S_{m,j}^{(L)} in the right variables, keyed by (L, m, j).
    let mut dy_s: HashMap<(usize, usize, usize), DoubledSymbol> = HashMap::new();
    let mut xs = vec![Symbol::zero(policy); levels];

    for m in 0..levels {
        let pieces = homogeneous_pieces(&s.slices[m]);
        for j in 1..=degrees {
            for l in 0..=j {
                for k in 1..=(j - l) {
                    let mut acc = DoubledSymbol::zero(policy);
                    if m > 0 && j > 1 {
                        if let Some(prev) = y.get(&(l, k - 1, m - 1, j - 1)) {
                            acc += &prev.diff_xi().diff_y();
                        }
                    }
                    for lp in 0..l {
                        for jp in 1..j {
                            for mp in 0..=m {
                                let Some(left) = y.get(&(lp, k - 1, mp, jp)) else { continue };
                                let Some(right) = dy_s.get(&(l - lp, m - mp, j - jp - 1)) else { continue };
                                acc += &left.diff_xi().mul(right);
                            }
                        }
                    }
                    let acc = acc.scale(&rat(1, k as i64));
                    if acc.is_zero() {
                        continue;
                    }
                    if acc.terms().any(|(key, _)| key.degree() != -(j as i32)) {
                        return Err(Error::Invariant(format!("Y_{{{k},{m},{j}}}^({l}) is not homogeneous")));
                    }
                    if l + k + 1 > j {
                        return Err(Error::Invariant(format!("Y_{{{k},{m},{j}}}^({l}) does not vanish")));
                    }
                    y.insert((l, k, m, j), acc);
                }
                // the boundary l + k = j was just computed and found zero
                report.vanishing += 1;
            }
            let mut close = pieces.get(&(j as i32)).cloned().unwrap_or_else(|| Symbol::zero(policy));
            for l in 0..=j {
                for k in 0..=(j - l) {
                    if (l, k) == (0, 0) {
                        continue;
                    }
                    if let Some(v) = y.get(&(l, k, m, j)) {
                        close -= &v.diagonal().scale(&rat(1, l as i64 + 1));
                    }
                }
            }
            xs[m] += &close;
            if !close.is_zero() {
                y.insert((0, 0, m, j), DoubledSymbol::left(&close));
            }
            for big_l in 1..=j {
                let mut part = Symbol::zero(policy);
                for k in 0..=j {
                    if let Some(v) = y.get(&(big_l - 1, k, m, j)) {
                        part += &v.diagonal();
                    }
                }
                if !part.is_zero() {
                    let part = part.scale(&rat(1, big_l as i64));
                    dy_s.insert((big_l, m, j), DoubledSymbol::right(&part).diff_y());
                }
            }
        }
    }
    report.order = y.len();
    Ok((HExpansion(xs), report))
}

/// Homogeneous parts of an hbar-free symbol, keyed by `-degree`.
fn homogeneous_pieces(s: &Symbol) -> HashMap<i32, Symbol> {
    let mut out: HashMap<i32, Symbol> = HashMap::new();
    for (e, p) in s.terms() {
        out.entry(-e.xi).or_insert_with(|| Symbol::zero(s.policy())).add_term(*e, p.clone());
    }
    out
}

/// `Psi = exp((S(hbar, x, z) + x z + zeta(t, z) + alpha log z) / hbar)`, kept symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaveFunction {
    /// `sum_n hbar^n S_n`, with `xi` read as `z`.
    pub s: Symbol,
    /// `x z + zeta(t, z)`.
    pub plane: Symbol,
    /// The exponent of the prefactor `z^(alpha/hbar)`.
    pub alpha: AlphaSeries,
}

impl WaveFunction {
    /// The whole exponent (times `hbar`) as a log-symbol in `z`.
    pub fn phase(&self) -> LogSymbol {
        LogSymbol::new(self.alpha.trimmed(), &self.s + &self.plane)
    }

    /// Text form, written in `z`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.alpha.is_zero() {
            out.push_str(&format!("z^(alpha/h), alpha = {}\n", crate::symbol::format::alpha_to_text(&self.alpha)));
        }
        for (e, p) in self.phase().body.terms() {
            out.push_str(&format!("h^{} z^{} : {}\n", e.h, e.xi, p));
        }
        out
    }
}

pub fn wave_function(s: &WKBPhase, alpha: &AlphaSeries, n_times: u32) -> WaveFunction {
    let policy = s.policy();
    let mut plane = zeta(policy, n_times);
    plane.add_term(Exp::new(0, 1), crate::algebra::Poly::x());
    WaveFunction { s: s.to_symbol(), plane, alpha: alpha.clone() }
}
