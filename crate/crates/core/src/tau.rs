//! hbar-expansion of `log tau` from the WKB phase.
//!
//! The phase slices are read as series in `z^-1` (the `xi` slot):
//! `S_n = -sum_k z^-k / k * v[n][k]`, and then
//! `dF_n/dt_j = v[n][j] + sum_{k+l=j} (1/l) dv[n-1][l]/dt_k`.

use std::fmt;

use crate::algebra::rational::inv_factorial;
use crate::algebra::{int, rat, Monomial, Poly, Var};
use crate::error::{Error, ParseError, Result};
use crate::symbol::{Exp, Symbol, TruncationPolicy};
use crate::wkb::WKBPhase;

/// `v[n][k]` for `n = 0..levels`, `k = 1..=width`. Missing entries are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauGradient {
    rows: Vec<Vec<Poly>>,
    /// Times are known through this total degree.
    pub t_cap: u32,
}

impl TauGradient {
    pub fn zero(levels: usize, width: usize, t_cap: u32) -> Self {
        TauGradient { rows: vec![vec![Poly::zero(); width]; levels], t_cap }
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `v[n][k]`; zero outside the table, including `n = -1`.
    pub fn get(&self, n: i64, k: u32) -> Poly {
        if n < 0 || k == 0 {
            return Poly::zero();
        }
        self.rows.get(n as usize).and_then(|r| r.get(k as usize - 1)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, n: usize, k: u32, value: Poly) {
        assert!(k >= 1, "v is indexed from k = 1");
        self.rows[n][k as usize - 1] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(Poly::is_zero)
    }

    /// Re-reads the space variable as `t1`: a coefficient must depend on `x` and
    /// `t1` only through `x + t1`; it is then evaluated at `t1 = 0` and renamed.
    pub fn absorb_x_into_t1(&self) -> Result<TauGradient> {
        let mut out = self.clone();
        for (n, row) in self.rows.iter().enumerate() {
            for (i, p) in row.iter().enumerate() {
                out.rows[n][i] = absorb(p, self.t_cap).ok_or_else(|| {
                    Error::Domain(format!("v[{n}][{}] depends on x and t1 other than through x + t1", i + 1))
                })?;
            }
        }
        Ok(out)
    }

    /// One `v[n][k] : poly` line per non-zero entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (n, row) in self.rows.iter().enumerate() {
            for (i, p) in row.iter().enumerate() {
                if !p.is_zero() {
                    out.push_str(&format!("v[{n}][{}] : {p}\n", i + 1));
                }
            }
        }
        out
    }

    pub fn parse(text: &str, t_cap: u32) -> Result<TauGradient, ParseError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || ParseError::new(format!("line {}: expected `v[n][k] : poly`", lineno + 1));
            let (head, body) = line.split_once(':').ok_or_else(bad)?;
            let head = head.trim().strip_prefix("v[").ok_or_else(bad)?;
            let (n, rest) = head.split_once("][").ok_or_else(bad)?;
            let k = rest.strip_suffix(']').ok_or_else(bad)?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            let k: u32 = k.trim().parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            entries.push((n, k, body.trim().parse::<Poly>()?.truncate_t(t_cap)));
        }
        let levels = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let width = entries.iter().map(|e| e.1 as usize).max().unwrap_or(0);
        let mut out = TauGradient::zero(levels, width, t_cap);
        for (n, k, p) in entries {
            out.set(n, k, p);
        }
        Ok(out)
    }
}

impl fmt::Display for TauGradient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn absorb(p: &Poly, t_cap: u32) -> Option<Poly> {
    let t1 = Var::T(1);
    if p.depends_on(t1) && p.depends_on(Var::X) {
        // d/dx and d/dt1 must agree wherever both are known
        let lhs = p.diff(Var::X).truncate_t(t_cap.saturating_sub(1));
        let rhs = p.diff(t1).truncate_t(t_cap.saturating_sub(1));
        if lhs != rhs {
            return None;
        }
    }
    if !p.depends_on(Var::X) {
        return Some(p.clone());
    }
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        if m.exponent(t1) == 0 {
            out.add_term(m.with_exponent(Var::X, 0).with_exponent(t1, m.exponent(Var::X)), c.clone());
        }
    }
    Some(out)
}

/// `v[n][k] = -k * [z^-k] S_n`.
pub fn extract_v(s: &WKBPhase) -> TauGradient {
    let policy = s.policy();
    let width = (-policy.xi_floor).max(0) as usize;
    let mut v = TauGradient::zero(s.slices.len(), width, policy.t_cap);
    for (n, slice) in s.slices.iter().enumerate() {
        for k in 1..=width as u32 {
            let c = slice.coeff(0, -(k as i32));
            if !c.is_zero() {
                v.set(n, k, c.scale(&-int(k as i64)));
            }
        }
    }
    v
}

/// A gradient component together with the derivative terms that could not be
/// formed because the table carries no time dependence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FGradient {
    pub value: Poly,
    /// `(k, l)` pairs whose `dv[n-1][l]/dt_k` was unavailable.
    pub missing: Vec<(u32, u32)>,
}

impl FGradient {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// `dF_n/dt_j`. Derivative terms are exact through t-degree `t_cap - 1`, so the
/// result is truncated there when any are present.
pub fn f_gradient(v: &TauGradient, n: usize, j: u32) -> Result<FGradient> {
    if n >= v.levels() || j == 0 || j as usize > v.width() {
        return Err(Error::OutOfRange(format!(
            "dF_{n}/dt_{j} needs 0 <= n < {} and 1 <= j <= {}",
            v.levels(),
            v.width()
        )));
    }
    let mut value = v.get(n as i64, j);
    let mut missing = Vec::new();
    if n == 0 {
        return Ok(FGradient { value, missing });
    }
    let mut derivs = Poly::zero();
    for l in 1..j {
        let k = j - l;
        let prev = v.get(n as i64 - 1, l);
        if v.t_cap == 0 {
            if !prev.is_zero() {
                missing.push((k, l));
            }
            continue;
        }
        derivs += &prev.diff(Var::T(k)).scale(&rat(1, l as i64));
    }
    if v.t_cap > 0 {
        value = (value + derivs).truncate_t(v.t_cap - 1);
    }
    Ok(FGradient { value, missing })
}

/// All of `dF_n/dt_1 ..= dF_n/dt_width`.
pub fn f_gradients(v: &TauGradient, n: usize) -> Result<Vec<FGradient>> {
    (1..=v.width() as u32).map(|j| f_gradient(v, n, j)).collect()
}

/// The polynomial `F` with `F(0) = 0` and `dF/dt_j = gradients[j - 1]`, integrated
/// along the segment from the origin. Fails on the first non-closed pair.
pub fn integrate_f(gradients: &[Poly]) -> Result<Poly> {
    for j in 1..=gradients.len() as u32 {
        for k in (j + 1)..=gradients.len() as u32 {
            let a = gradients[j as usize - 1].diff(Var::T(k));
            let b = gradients[k as usize - 1].diff(Var::T(j));
            if a != b {
                return Err(Error::NotClosed { j, k });
            }
        }
    }
    // F(t) = int_0^1 sum_j t_j g_j(s t) ds
    let mut f = Poly::zero();
    for (i, g) in gradients.iter().enumerate() {
        let tj = Monomial::var(Var::T(i as u32 + 1), 1);
        for (m, c) in g.terms() {
            let d = m.t_degree() as i64;
            f.add_term(m.mul(&tj), c.clone() * rat(1, d + 1));
        }
    }
    Ok(f)
}

/// An odd hbar-level where `log tau` fails to be a genus expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityViolation {
    /// The level is `2m + 1`.
    pub m: usize,
    pub j: u32,
    pub value: Poly,
    /// Derivative terms were unavailable (`t_cap = 0`), so `value` is partial.
    pub partial: bool,
}

/// Evaluates `v[2m+1][j] + sum_{k+l=j} (1/l) dv[2m][l]/dt_k` at every odd level in
/// range. Empty means only even powers of hbar shift `log tau`.
pub fn genus_parity_check(v: &TauGradient) -> Vec<ParityViolation> {
    let mut out = Vec::new();
    for n in (1..v.levels()).step_by(2) {
        for j in 1..=v.width() as u32 {
            let g = f_gradient(v, n, j).expect("indices are in range");
            if !g.value.is_zero() {
                out.push(ParityViolation { m: n / 2, j, partial: !g.missing.is_empty(), value: g.value });
            }
        }
    }
    out
}

/// `log tau = sum_n hbar^(n-2) F_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauExpansion {
    pub f: Vec<Poly>,
}

impl TauExpansion {
    /// Integrates every level of the gradient table.
    pub fn from_gradient(v: &TauGradient) -> Result<TauExpansion> {
        let mut f = Vec::with_capacity(v.levels());
        for n in 0..v.levels() {
            let grads = f_gradients(v, n)?;
            if let Some(g) = grads.iter().find(|g| !g.is_complete()) {
                return Err(Error::Truncation(format!(
                    "dF_{n} needs time derivatives {:?}, which t_cap = 0 cannot supply",
                    g.missing
                )));
            }
            let values: Vec<Poly> = grads.into_iter().map(|g| g.value).collect();
            f.push(integrate_f(&values)?);
        }
        Ok(TauExpansion { f })
    }

    /// `S - zeta` from `hbar^-1 (S - zeta) = (exp(-hbar D(z)) - 1) log tau`, with
    /// `D(z) = sum_j z^-j / j d/dt_j`, expanded on the retained orders.
    pub fn shifted_phase(&self, policy: TruncationPolicy) -> WKBPhase {
        let levels = policy.hbar_cap as usize + 1;
        let width = (-policy.xi_floor).max(0);
        let mut slices = vec![Symbol::zero(policy); levels];
        for (n, fnn) in self.f.iter().enumerate() {
            // D^r F_n / r! contributes to hbar^(n + r - 1) with sign (-1)^r
            let mut power = Symbol::constant(policy, fnn.clone());
            for r in 1..=width as u32 {
                let level = n + r as usize - 1;
                if level >= levels {
                    break;
                }
                power = apply_d(&power, width);
                if power.is_zero() {
                    break;
                }
                let sign = if r % 2 == 1 { -int(1) } else { int(1) };
                slices[level] += &power.scale(&(sign * inv_factorial(r)));
            }
        }
        WKBPhase { slices }
    }
}

fn apply_d(a: &Symbol, width: i32) -> Symbol {
    let mut out = Symbol::zero(a.policy());
    for (e, p) in a.terms() {
        for j in 1..=width {
            if e.xi - j < -width {
                break;
            }
            let d = p.diff(Var::T(j as u32));
            if !d.is_zero() {
                out.add_term(Exp::new(0, e.xi - j), d.scale(&rat(1, j as i64)));
            }
        }
    }
    out
}
