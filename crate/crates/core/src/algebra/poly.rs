//! Sparse multivariate polynomials in `x, t1, .., tN` over exact rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{One, Zero};

use super::rational::{falling_factorial, format_rational, inv_factorial, parse_rational, Rational};
use crate::error::ParseError;

/// A polynomial variable: the space coordinate `x` or a time `t_j` (`j >= 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    T(u32),
}

impl Var {
    fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::T(j) => {
                assert!(j >= 1, "time variables are numbered from 1");
                j as usize
            }
        }
    }

    fn from_index(i: usize) -> Var {
        if i == 0 {
            Var::X
        } else {
            Var::T(i as u32)
        }
    }

    fn name(self) -> String {
        match self {
            Var::X => "x".to_string(),
            Var::T(j) => format!("t{j}"),
        }
    }
}

/// Exponent vector over `[x, t1, t2, ..]` with trailing zeros trimmed, so that
/// the derived lexicographic order agrees with the order on padded vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn var(var: Var, exp: u32) -> Self {
        let mut v = vec![0; var.index() + 1];
        v[var.index()] = exp;
        Monomial::new(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, var: Var) -> u32 {
        self.0.get(var.index()).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn t_degree(&self) -> u32 {
        self.0.iter().skip(1).sum()
    }

    pub fn with_exponent(&self, var: Var, exp: u32) -> Monomial {
        let mut v = self.0.clone();
        if v.len() <= var.index() {
            v.resize(var.index() + 1, 0);
        }
        v[var.index()] = exp;
        Monomial::new(v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (long, short) = if self.0.len() >= other.0.len() { (self, other) } else { (other, self) };
        let mut v = long.0.clone();
        for (a, b) in v.iter_mut().zip(&short.0) {
            *a += b;
        }
        Monomial(v)
    }

    /// Monomial without its `x` factor.
    pub fn without_x(&self) -> Monomial {
        self.with_exponent(Var::X, 0)
    }

    fn vars(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (Var::from_index(i), *e))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> =
            self.vars().map(|(v, e)| if e == 1 { v.name() } else { format!("{}^{e}", v.name()) }).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Exact polynomial in `x` and the times. No zero coefficients are ever stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial(Monomial::one(), c)
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(var: Var) -> Self {
        Poly::monomial(Monomial::var(var, 1), Rational::one())
    }

    pub fn x() -> Self {
        Poly::var(Var::X)
    }

    /// `c * x^e`
    pub fn x_pow(c: Rational, e: u32) -> Self {
        Poly::monomial(Monomial::var(Var::X, e), c)
    }

    pub fn t(j: u32) -> Self {
        Poly::var(Var::T(j))
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

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// The value when every variable is absent, `None` if the polynomial is not constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    /// Product with every monomial of total t-degree above `t_cap` discarded.
    pub fn mul_truncated(&self, other: &Poly, t_cap: u32) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            let da = ma.t_degree();
            if da > t_cap {
                continue;
            }
            for (mb, cb) in &other.terms {
                if da + mb.t_degree() > t_cap {
                    continue;
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn truncate_t(&self, t_cap: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.t_degree() <= t_cap)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn diff(&self, var: Var) -> Poly {
        self.diff_n(var, 1)
    }

    /// k-th partial derivative.
    pub fn diff_n(&self, var: Var, k: u32) -> Poly {
        if k == 0 {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e < k {
                continue;
            }
            let factor = falling_factorial(e as i64, k);
            out.add_term(m.with_exponent(var, e - k), c * Rational::from_integer(factor));
        }
        out
    }

    pub fn degree_in(&self, var: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(var)).max().unwrap_or(0)
    }

    pub fn t_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::t_degree).max().unwrap_or(0)
    }

    pub fn depends_on(&self, var: Var) -> bool {
        self.terms.keys().any(|m| m.exponent(var) > 0)
    }

    /// Whether any time variable occurs.
    pub fn has_times(&self) -> bool {
        self.terms.keys().any(|m| m.t_degree() > 0)
    }

    /// Apply a monomial map, collecting like terms.
    pub fn map_monomials(&self, mut f: impl FnMut(&Monomial) -> Monomial) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(f(m), c.clone());
        }
        out
    }

    /// Splits by powers of `x`: `p = sum_e x^e * parts[e]`, each part free of `x`.
    pub fn split_x(&self) -> BTreeMap<u32, Poly> {
        let mut parts: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts.entry(m.exponent(Var::X)).or_default().add_term(m.without_x(), c.clone());
        }
        parts
    }

    /// Multiply by `x^e`.
    pub fn mul_x_pow(&self, e: u32) -> Poly {
        if e == 0 {
            return self.clone();
        }
        self.map_monomials(|m| m.with_exponent(Var::X, m.exponent(Var::X) + e))
    }

    /// Taylor shift `p(x) -> p(x + t1)`, truncated to total t-degree `t_cap`.
    pub fn shift_x_by_t1(&self, t_cap: u32) -> Poly {
        let mut out = Poly::zero();
        let t1 = Monomial::var(Var::T(1), 1);
        let mut t_power = Monomial::one();
        for k in 0..=t_cap.min(self.degree_in(Var::X)) {
            let dk = self.diff_n(Var::X, k).scale(&inv_factorial(k));
            for (m, c) in dk.terms() {
                let shifted = m.mul(&t_power);
                if shifted.t_degree() <= t_cap {
                    out.add_term(shifted, c.clone());
                }
            }
            t_power = t_power.mul(&t1);
        }
        out
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

/// Untruncated product.
impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_truncated(rhs, u32::MAX)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

/// Renders a coefficient/monomial pair as one signed term, e.g. `-1/4*x^2`.
pub(crate) fn format_term(c: &Rational, monomial: &str) -> String {
    if monomial.is_empty() || monomial == "1" {
        return format_rational(c);
    }
    if c.is_one() {
        monomial.to_string()
    } else if (-c).is_one() {
        format!("-{monomial}")
    } else {
        format!("{}*{monomial}", format_rational(c))
    }
}

/// Joins signed terms as `a + b - c`.
pub(crate) fn join_terms(terms: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    for (i, t) in terms.into_iter().enumerate() {
        if i == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = join_terms(self.terms.iter().map(|(m, c)| format_term(c, &m.to_string())));
        f.write_str(&s)
    }
}

/// A parsed term: coefficient and `(variable name, exponent)` factors.
pub(crate) type RawTerm = (Rational, Vec<(String, u32)>);

/// Lexes `a + b - c` style sums of products `coef*var^e*...`.
pub(crate) fn parse_raw_terms(s: &str) -> Result<Vec<RawTerm>, ParseError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(ParseError::new("empty polynomial"));
    }
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            if current.is_empty() {
                return Err(ParseError::new(format!("dangling sign in `{s}`")));
            }
            pieces.push((negative, std::mem::take(&mut current)));
            negative = ch == '-';
        } else if ch == '-' && i == 0 {
            negative = true;
        } else if ch == '+' && i == 0 {
        } else {
            current.push(ch);
        }
    }
    if current.is_empty() {
        return Err(ParseError::new(format!("dangling sign in `{s}`")));
    }
    pieces.push((negative, current));

    let mut out = Vec::with_capacity(pieces.len());
    for (neg, body) in pieces {
        let mut coef = Rational::one();
        let mut vars = Vec::new();
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(ParseError::new(format!("empty factor in `{s}`")));
            }
            if factor.starts_with(|c: char| c.is_ascii_digit()) {
                coef *= parse_rational(factor)?;
            } else {
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => {
                        let e: u32 = e.parse().map_err(|_| ParseError::new(format!("bad exponent in `{factor}`")))?;
                        (n, e)
                    }
                    None => (factor, 1),
                };
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
                    return Err(ParseError::new(format!("bad variable `{name}`")));
                }
                vars.push((name.to_string(), exp));
            }
        }
        if neg {
            coef = -coef;
        }
        out.push((coef, vars));
    }
    Ok(out)
}

fn parse_var(name: &str) -> Result<Var, ParseError> {
    if name == "x" {
        return Ok(Var::X);
    }
    if let Some(idx) = name.strip_prefix('t') {
        if let Ok(j) = idx.parse::<u32>() {
            if j >= 1 {
                return Ok(Var::T(j));
            }
        }
    }
    Err(ParseError::new(format!("unknown variable `{name}`")))
}

impl FromStr for Poly {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Poly::zero();
        for (c, vars) in parse_raw_terms(s)? {
            let mut m = Monomial::one();
            for (name, e) in vars {
                m = m.mul(&Monomial::var(parse_var(&name)?, e));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }
}

/// Convenience for tests and literals: panics on malformed input.
pub fn poly(s: &str) -> Poly {
    s.parse().unwrap_or_else(|e| panic!("{e}: `{s}`"))
}
