//! Exact rational helpers on top of `num_rational::BigRational`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::ParseError;

/// Arbitrary-precision rational. Always stored reduced with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d`, reduced. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn inv_factorial(n: u32) -> Rational {
    Rational::new(BigInt::one(), factorial(n))
}

/// Falling factorial `m (m-1) ... (m-k+1)` for a signed integer `m`.
pub fn falling_factorial(m: i64, k: u32) -> BigInt {
    (0..k as i64).fold(BigInt::one(), |acc, j| acc * BigInt::from(m - j))
}

/// Generalized binomial coefficient `binom(r, k)` for rational `r`.
pub fn binomial(r: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    for j in 0..k {
        acc *= r - int(j as i64);
    }
    acc * inv_factorial(k)
}

/// Canonical text: `p` when the denominator is one, otherwise `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let s = s.trim();
    let bad = || ParseError::new(format!("invalid rational `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| bad())?;
    let den: BigInt = den.trim().parse().map_err(|_| bad())?;
    if den.is_zero() || den.is_negative() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}
