//! Recursive construction of the dressing operator `W = exp(X/hbar) xi^(alpha/hbar)`
//! from a canonical pair `(f, g)` and a dispersionless seed `(X_0, alpha_0)`.
//!
//! Each level `i` reads the hbar-slices `i` of the dressed pair, integrates the
//! negative part of `d_xi Q_0 P_i - d_xi P_0 Q_i` and inverts the tilde map.
//! The pair is re-dressed from scratch after every accepted level.

use num_traits::Zero;

use crate::algebra::{Poly, Rational, Var};
use crate::error::{Error, Result};
use crate::lie::{adjoint_exp, adjoint_log_power, invert_tilde};
use crate::symbol::calculus::{commutator, commutator_over_hbar, integrate_xi, mul, poisson, series_exp, star_pow};
use crate::symbol::{AlphaSeries, Exp, LogSymbol, Range, Symbol, TruncationPolicy};

/// Number of xi-levels a solve at depth `n` loses to truncation at the bottom of
/// the window: every level consumes two, the seed and the final dressing two more.
pub fn guard_for_depth(n: usize) -> u32 {
    2 * n as u32 + 4
}

/// Lowest xi-level at which level-`i` quantities computed at `policy` are exact.
pub fn reliable_floor(policy: &TruncationPolicy, i: usize) -> i32 {
    policy.xi_floor + 2 * i as i32 + 4
}

/// A canonically commuting pair `[f, g] = hbar`.
#[derive(Clone, Debug)]
pub struct RHProblem {
    pub f: Symbol,
    pub g: Symbol,
    /// Number of times `t_1..t_n` switched on in `zeta(t, xi)`.
    pub n_times: u32,
}

impl RHProblem {
    pub fn new(f: Symbol, g: Symbol, n_times: u32) -> Result<Self> {
        for (name, s) in [("f", &f), ("g", &g)] {
            if s.ord_hbar().is_some_and(|o| o > 0) {
                return Err(Error::Domain(format!("{name} has positive hbar-order")));
            }
        }
        let policy = f.policy().meet(&g.policy());
        let lift = f.ord().unwrap_or(0).max(0) + g.ord().unwrap_or(0).max(0);
        let bracket = commutator(&f, &g).cut_below(policy.xi_floor + lift);
        if bracket != Symbol::hbar(policy) {
            return Err(Error::Domain(format!("[f, g] is not hbar:\n{bracket}")));
        }
        Ok(RHProblem { f, g, n_times })
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.f.policy().meet(&self.g.policy())
    }

    pub fn with_policy(&self, policy: TruncationPolicy) -> RHProblem {
        RHProblem { f: self.f.with_policy(policy), g: self.g.with_policy(policy), n_times: self.n_times }
    }
}

/// `f = xi^2`, `g = x xi^-1 / 2 - hbar xi^-2 / 4 - xi`.
pub fn kontsevich_problem(policy: TruncationPolicy) -> RHProblem {
    let half = Rational::new(1.into(), 2.into());
    let quarter = Rational::new((-1).into(), 4.into());
    let f = Symbol::xi_pow(policy, 2);
    let g = Symbol::from_terms(
        policy,
        [
            (Exp::new(0, -1), Poly::x().scale(&half)),
            (Exp::new(1, -2), Poly::constant(quarter)),
            (Exp::new(0, 1), Poly::constant(-Rational::from_integer(1.into()))),
        ],
    );
    RHProblem::new(f, g, 0).expect("the built-in pair is canonical")
}

/// `zeta(t, xi) = sum_{n <= n_times} t_n xi^n`.
pub fn zeta(policy: TruncationPolicy, n_times: u32) -> Symbol {
    Symbol::from_terms(policy, (1..=n_times).map(|n| (Exp::new(0, n as i32), Poly::t(n))))
}

/// `Ad(exp(zeta(t, xi)/hbar)) a`; the identity when no time is active.
pub fn time_dress(a: &Symbol, n_times: u32) -> Symbol {
    if n_times == 0 || a.policy().t_cap == 0 {
        return a.clone();
    }
    let z = zeta(a.policy(), n_times);
    series_exp(a, |s| commutator_over_hbar(&z, s))
}

/// `X = sum hbar^n X_n` and `alpha = sum hbar^n alpha_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DressingData {
    pub xs: Vec<Symbol>,
    pub alphas: AlphaSeries,
}

impl DressingData {
    pub fn seed(x0: Symbol, alpha0: Rational) -> Self {
        DressingData { xs: vec![x0], alphas: AlphaSeries::constant(alpha0) }
    }

    pub fn trivial(policy: TruncationPolicy) -> Self {
        DressingData::seed(Symbol::zero(policy), Rational::zero())
    }

    pub fn depth(&self) -> usize {
        self.xs.len().saturating_sub(1)
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.xs[0].policy()
    }

    /// `X = sum_n hbar^n X_n` as one symbol.
    pub fn total_x(&self) -> Symbol {
        let policy = self.policy();
        let mut x = Symbol::zero(policy);
        for (n, xn) in self.xs.iter().enumerate() {
            x += &xn.mul_hbar(n as u32);
        }
        x
    }

    pub fn alpha(&self, n: usize) -> Rational {
        self.alphas.get(n)
    }

    pub fn with_policy(&self, policy: TruncationPolicy) -> DressingData {
        DressingData { xs: self.xs.iter().map(|x| x.with_policy(policy)).collect(), alphas: self.alphas.clone() }
    }

    pub fn cut_below(&self, floor: i32) -> DressingData {
        DressingData { xs: self.xs.iter().map(|x| x.cut_below(floor)).collect(), alphas: self.alphas.clone() }
    }

    /// Reinstates `t_1` through `x -> x + t_1`, truncated at the policy's t-cap.
    pub fn shift_x_by_t1(&self) -> DressingData {
        let cap = self.policy().t_cap;
        DressingData {
            xs: self.xs.iter().map(|x| x.map_coeffs(|p| p.shift_x_by_t1(cap))).collect(),
            alphas: self.alphas.clone(),
        }
    }

    /// `Ad(exp(X/hbar) xi^(alpha/hbar) exp(zeta/hbar)) a`.
    pub fn dress(&self, a: &Symbol, n_times: u32) -> Result<Symbol> {
        let a = a.with_policy(a.policy().meet(&self.policy()));
        let timed = time_dress(&a, n_times);
        let logged = adjoint_log_power(&self.alphas, &timed);
        adjoint_exp(&self.total_x(), &logged)
    }
}

/// `(P, Q)`: the problem pair dressed by `d`.
pub fn dress_pair(d: &DressingData, problem: &RHProblem) -> Result<(Symbol, Symbol)> {
    Ok((d.dress(&problem.f, problem.n_times)?, d.dress(&problem.g, problem.n_times)?))
}

/// Iteration state before computing level `i`.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub i: usize,
    pub data: DressingData,
    pub p: Symbol,
    pub q: Symbol,
}

impl SolverState {
    pub fn new(data: DressingData, problem: &RHProblem) -> Result<Self> {
        let (p, q) = dress_pair(&data, problem)?;
        Ok(SolverState { i: data.xs.len(), data, p, q })
    }
}

/// Everything computed while solving one level.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub i: usize,
    pub alpha: Rational,
    pub x: Symbol,
    /// `alpha_i log xi + X~_i`.
    pub tilde: LogSymbol,
    /// Slices `i` of the pair before the update.
    pub p_slice: Symbol,
    pub q_slice: Symbol,
    pub compatible: bool,
}

fn integrand(p0: &Symbol, q0: &Symbol, pi: &Symbol, qi: &Symbol) -> Symbol {
    (&mul(&q0.diff_xi(), pi) - &mul(&p0.diff_xi(), qi)).project(Range::Negative)
}

/// Both sides of the compatibility condition `d_x A_{<0} = d_xi B_{<0}`.
pub fn compatibility_sides(p: &Symbol, q: &Symbol, i: usize) -> (Symbol, Symbol) {
    let (p0, q0) = (p.sigma(0), q.sigma(0));
    let (pi, qi) = (p.sigma(-(i as i32)), q.sigma(-(i as i32)));
    let a = integrand(&p0, &q0, &pi, &qi);
    let b = (&mul(&q0.diff(Var::X), &pi) - &mul(&p0.diff(Var::X), &qi)).project(Range::Negative);
    (a.diff(Var::X), b.diff_xi())
}

/// Whether the system determining level `i` is solvable, compared at the
/// levels the truncation vouches for.
pub fn check_compatibility(p: &Symbol, q: &Symbol, i: usize) -> bool {
    let floor = reliable_floor(&p.policy().meet(&q.policy()), i);
    let (l, r) = compatibility_sides(p, q, i);
    l.cut_below(floor) == r.cut_below(floor)
}

/// One level of the recursion.
pub fn rh_step(state: &SolverState) -> Result<StepOutcome> {
    let i = state.i;
    let (p0, q0) = (state.p.sigma(0), state.q.sigma(0));
    let (pi, qi) = (state.p.sigma(-(i as i32)), state.q.sigma(-(i as i32)));
    let compatible = check_compatibility(&state.p, &state.q, i);
    if !compatible {
        let (l, r) = compatibility_sides(&state.p, &state.q, i);
        let floor = reliable_floor(&state.p.policy(), i);
        let diff = (&l - &r).cut_below(floor);
        return Err(Error::Compatibility { level: i, detail: format!("sides differ by\n{diff}") });
    }
    let tilde = integrate_xi(&integrand(&p0, &q0, &pi, &qi))?;
    let (alpha, x) = invert_tilde(&tilde, &state.data.xs[0])?;
    Ok(StepOutcome { i, alpha, x, tilde, p_slice: pi, q_slice: qi, compatible })
}

/// Result of [`rh_solve`] with per-level diagnostics.
#[derive(Clone, Debug)]
pub struct Solution {
    pub data: DressingData,
    pub steps: Vec<StepOutcome>,
    /// Dressed pairs `P^{(i)}, Q^{(i)}` for `i = 0..=depth`.
    pub pairs: Vec<(Symbol, Symbol)>,
}

impl Solution {
    pub fn p(&self) -> &Symbol {
        &self.pairs.last().unwrap().0
    }

    pub fn q(&self) -> &Symbol {
        &self.pairs.last().unwrap().1
    }
}

fn nonnegative_through(s: &Symbol, levels: usize, floor: i32) -> bool {
    (0..=levels).all(|j| s.sigma(-(j as i32)).project(Range::Negative).cut_below(floor).is_zero())
}

/// Seed conditions: `{P_0, Q_0} = 1` and both dressed slices 0 free of negative powers.
pub fn check_seed(p: &Symbol, q: &Symbol) -> Result<()> {
    let policy = p.policy();
    let floor = reliable_floor(&policy, 0);
    let (p0, q0) = (p.sigma(0), q.sigma(0));
    let one = Symbol::constant(policy, Poly::one());
    if poisson(&p0, &q0).cut_below(floor) != one {
        return Err(Error::Seed("{P_0, Q_0} != 1".into()));
    }
    if !nonnegative_through(p, 0, floor) || !nonnegative_through(q, 0, floor) {
        return Err(Error::Seed("dressed pair has negative powers at hbar-order 0".into()));
    }
    Ok(())
}

/// Solves levels `1..=depth` from the seed, all at the problem's policy. Only
/// levels above [`reliable_floor`] are meaningful; see [`guard_for_depth`].
pub fn rh_solve(problem: &RHProblem, x0: &Symbol, alpha0: &Rational, depth: usize) -> Result<Solution> {
    let policy = problem.policy();
    if depth > policy.hbar_cap as usize {
        return Err(Error::Truncation(format!("depth {depth} exceeds hbar cap {}", policy.hbar_cap)));
    }
    let mut state = SolverState::new(DressingData::seed(x0.with_policy(policy), alpha0.clone()), problem)?;
    check_seed(&state.p, &state.q)?;
    let mut steps = Vec::with_capacity(depth);
    let mut pairs = vec![(state.p.clone(), state.q.clone())];
    for _ in 1..=depth {
        let out = rh_step(&state)?;
        let i = out.i;
        let mut data = state.data.clone();
        data.xs.push(out.x.clone());
        data.alphas.set(i, out.alpha.clone());
        let next = SolverState::new(data, problem)?;
        let floor = reliable_floor(&policy, i);
        for j in 0..i {
            let j = -(j as i32);
            if next.p.sigma(j).cut_below(floor) != state.p.sigma(j).cut_below(floor)
                || next.q.sigma(j).cut_below(floor) != state.q.sigma(j).cut_below(floor)
            {
                return Err(Error::Invariant(format!("level {i} changed hbar-slice {}", -j)));
            }
        }
        if !nonnegative_through(&next.p, i, floor) || !nonnegative_through(&next.q, i, floor) {
            return Err(Error::Invariant(format!("slice {i} still has negative powers after level {i}")));
        }
        pairs.push((next.p.clone(), next.q.clone()));
        steps.push(out);
        state = next;
    }
    Ok(Solution { data: state.data, steps, pairs })
}

/// `L = Ad(W) xi`; the log factor and `zeta` commute with `xi`.
pub fn compute_l(d: &DressingData) -> Result<Symbol> {
    adjoint_exp(&d.total_x(), &Symbol::xi_pow(d.policy(), 1))
}

/// `M = Ad(W exp(zeta/hbar)) x`.
pub fn compute_m(d: &DressingData, n_times: u32) -> Result<Symbol> {
    d.dress(&Symbol::x(d.policy()), n_times)
}

/// `B_n = (L^n)_{>=0}`.
pub fn compute_bn(l: &Symbol, n: u32) -> Symbol {
    star_pow(l, n).project(Range::NonNegative)
}

/// Residuals `hbar dL/dt_n - [B_n, L]` and `hbar dM/dt_n - [B_n, M]`, restricted to
/// the t-degrees and xi-levels the truncation determines.
pub fn lax_residual(d: &DressingData, n: u32, n_times: u32) -> Result<(Symbol, Symbol)> {
    let policy = d.policy();
    if policy.t_cap == 0 {
        return Err(Error::Domain("Lax residuals need t_cap >= 1".into()));
    }
    if n == 0 || n > n_times {
        return Err(Error::Domain(format!("t_{n} is not among the {n_times} active times")));
    }
    let l = compute_l(d)?;
    let m = compute_m(d, n_times)?;
    let b = compute_bn(&l, n);
    let floor = reliable_floor(&policy, d.depth()) + n as i32;
    let residual = |a: &Symbol| {
        (&a.diff(Var::T(n)).mul_hbar(1) - &commutator(&b, a)).truncate_t_below(policy.t_cap).cut_below(floor)
    };
    Ok((residual(&l), residual(&m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly;

    const P: TruncationPolicy = TruncationPolicy::new(-10, 3, 2);

    #[test]
    fn time_dress_examples() {
        let xi3 = Symbol::xi_pow(P, 3);
        assert_eq!(time_dress(&xi3, 3), xi3);
        let x = Symbol::x(P);
        let expect = Symbol::from_terms(
            P,
            [(Exp::new(0, 0), poly("x + t1")), (Exp::new(0, 1), poly("2*t2")), (Exp::new(0, 2), poly("3*t3"))],
        );
        assert_eq!(time_dress(&x, 3), expect);
        let p0 = TruncationPolicy { t_cap: 0, ..P };
        assert_eq!(time_dress(&Symbol::x(p0), 3), Symbol::x(p0));
    }

    #[test]
    fn trivial_dressing_is_identity() {
        let policy = TruncationPolicy::new(-10, 3, 0);
        let prob = kontsevich_problem(policy);
        let (p, q) = dress_pair(&DressingData::trivial(policy), &prob).unwrap();
        assert_eq!(p, prob.f);
        assert_eq!(q, prob.g);
    }

    #[test]
    fn rejects_non_canonical_pair() {
        let f = Symbol::xi_pow(P, 2);
        assert!(RHProblem::new(f.clone(), Symbol::x(P), 0).is_err());
        assert!(RHProblem::new(Symbol::xi_pow(P, 1), Symbol::x(P), 0).is_ok());
    }

    #[test]
    fn trivial_l_and_m() {
        let d = DressingData::trivial(P);
        assert_eq!(compute_l(&d).unwrap(), Symbol::xi_pow(P, 1));
        assert_eq!(
            compute_m(&d, 2).unwrap(),
            Symbol::from_terms(P, [(Exp::new(0, 0), poly("x + t1")), (Exp::new(0, 1), poly("2*t2"))])
        );
        let (rl, rm) = lax_residual(&d, 1, 2).unwrap();
        assert!(rl.is_zero() && rm.is_zero());
        assert!(lax_residual(&DressingData::trivial(TruncationPolicy { t_cap: 0, ..P }), 1, 1).is_err());
    }

    #[test]
    fn degenerate_compatibility() {
        let p = Symbol::from_terms(
            P,
            [(Exp::new(0, 2), poly("1")), (Exp::new(1, -3), poly("x")), (Exp::new(1, -1), poly("x^2"))],
        );
        assert!(check_compatibility(&p, &p, 1));
    }
}
