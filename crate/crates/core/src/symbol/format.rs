//! Text and JSON serialization of symbols and named symbol bundles.
//!
//! Text form, one term per line in canonical order:
//!
//! ```text
//! log : 1/2*h
//! h^0 xi^2 : 1
//! h^0 xi^0 : x
//! h^1 xi^-1 : 1/2
//! ```
//!
//! Bundles prefix each symbol with a `[name]` header line.

use serde::{Deserialize, Serialize};

use super::{AlphaSeries, Exp, LogSymbol, Symbol, TruncationPolicy};
use crate::algebra::poly::{format_term, join_terms, parse_raw_terms};
use crate::algebra::{Poly, Rational};
use crate::error::ParseError;

pub fn symbol_to_text(s: &Symbol) -> String {
    let mut out = String::new();
    for (e, p) in s.terms() {
        out.push_str(&format!("h^{} xi^{} : {}\n", e.h, e.xi, p));
    }
    out
}

pub fn log_symbol_to_text(s: &LogSymbol) -> String {
    let mut out = String::new();
    if !s.log_coef.is_zero() {
        out.push_str(&format!("log : {}\n", alpha_to_text(&s.log_coef)));
    }
    out.push_str(&symbol_to_text(&s.body));
    out
}

/// An hbar-polynomial such as `1/2 + 3*h^2`.
pub fn alpha_to_text(a: &AlphaSeries) -> String {
    join_terms(a.0.iter().enumerate().filter(|(_, c)| !num_traits::Zero::is_zero(*c)).map(|(n, c)| {
        let m = match n {
            0 => String::new(),
            1 => "h".to_string(),
            _ => format!("h^{n}"),
        };
        format_term(c, &m)
    }))
}

pub fn parse_alpha(text: &str) -> Result<AlphaSeries, ParseError> {
    let mut out = AlphaSeries::zero();
    for (c, vars) in parse_raw_terms(text)? {
        let mut n = 0usize;
        for (name, e) in vars {
            if name != "h" {
                return Err(ParseError::new(format!("log coefficient may only involve h, found `{name}`")));
            }
            n += e as usize;
        }
        let prev = out.get(n);
        out.set(n, prev + c);
    }
    Ok(out.trimmed())
}

fn parse_exponent_token<T: std::str::FromStr>(tok: &str, prefix: &str, line: &str) -> Result<T, ParseError> {
    tok.strip_prefix(prefix)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| ParseError::new(format!("expected `{prefix}<int>` in line `{line}`")))
}

/// Parses the text form; terms outside `policy` are truncated away.
pub fn parse_log_symbol(text: &str, policy: TruncationPolicy) -> Result<LogSymbol, ParseError> {
    let mut body = Symbol::zero(policy);
    let mut log_coef = AlphaSeries::zero();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (lhs, rhs) =
            line.split_once(':').ok_or_else(|| ParseError::new(format!("missing `:` in line `{line}`")))?;
        let lhs = lhs.trim();
        if lhs == "log" {
            log_coef = parse_alpha(rhs)?;
            continue;
        }
        let mut toks = lhs.split_whitespace();
        let (Some(ht), Some(xt), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(ParseError::new(format!("expected `h^<n> xi^<m>` in line `{line}`")));
        };
        let h: u32 = parse_exponent_token(ht, "h^", line)?;
        let xi: i32 = parse_exponent_token(xt, "xi^", line)?;
        let coef: Poly = rhs.trim().parse()?;
        body.add_term(Exp::new(h, xi), coef);
    }
    Ok(LogSymbol::new(log_coef, body))
}

pub fn parse_symbol(text: &str, policy: TruncationPolicy) -> Result<Symbol, ParseError> {
    let ls = parse_log_symbol(text, policy)?;
    if !ls.log_coef.is_zero() {
        return Err(ParseError::new("unexpected `log` line in a plain symbol"));
    }
    Ok(ls.body)
}

/// Named symbols in a fixed order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bundle {
    pub entries: Vec<(String, LogSymbol)>,
}

impl Bundle {
    pub fn new() -> Self {
        Bundle::default()
    }

    pub fn push(&mut self, name: impl Into<String>, s: LogSymbol) {
        self.entries.push((name.into(), s));
    }

    pub fn push_symbol(&mut self, name: impl Into<String>, s: Symbol) {
        self.push(name, LogSymbol::plain(s));
    }

    pub fn get(&self, name: &str) -> Option<&LogSymbol> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (name, s)) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("[{name}]\n"));
            out.push_str(&log_symbol_to_text(s));
        }
        out
    }

    /// Accepts either a bundle or a bare symbol (which becomes the single entry `""`).
    pub fn parse(text: &str, policy: TruncationPolicy) -> Result<Bundle, ParseError> {
        let mut sections: Vec<(String, String)> = Vec::new();
        let mut current: Option<(String, String)> = None;
        let mut loose = String::new();
        for line in text.lines() {
            let t = line.trim();
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                if let Some(sec) = current.take() {
                    sections.push(sec);
                }
                current = Some((name.trim().to_string(), String::new()));
            } else if let Some((_, body)) = current.as_mut() {
                body.push_str(line);
                body.push('\n');
            } else if !t.is_empty() && !t.starts_with('#') {
                loose.push_str(line);
                loose.push('\n');
            }
        }
        if let Some(sec) = current.take() {
            sections.push(sec);
        }
        if !loose.is_empty() {
            if !sections.is_empty() {
                return Err(ParseError::new("terms before the first `[name]` header"));
            }
            sections.push((String::new(), loose));
        }
        let mut b = Bundle::new();
        for (name, body) in sections {
            b.push(name, parse_log_symbol(&body, policy)?);
        }
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<NamedJson> = self
            .entries
            .iter()
            .map(|(name, s)| NamedJson { name: name.clone(), symbol: SymbolJson::from_log_symbol(s) })
            .collect();
        serde_json::to_string_pretty(&entries).expect("serializing plain data cannot fail")
    }

    pub fn from_json(text: &str, policy: TruncationPolicy) -> Result<Bundle, ParseError> {
        let entries: Vec<NamedJson> =
            serde_json::from_str(text).map_err(|e| ParseError::new(format!("invalid JSON bundle: {e}")))?;
        let mut b = Bundle::new();
        for e in entries {
            b.push(e.name, e.symbol.to_log_symbol(policy)?);
        }
        Ok(b)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    h: u32,
    xi: i32,
    coef: String,
}

/// Structured mirror of the text form.
#[derive(Serialize, Deserialize)]
pub struct SymbolJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log: Option<String>,
    terms: Vec<TermJson>,
}

impl SymbolJson {
    pub fn from_log_symbol(s: &LogSymbol) -> Self {
        SymbolJson {
            log: (!s.log_coef.is_zero()).then(|| alpha_to_text(&s.log_coef)),
            terms: s.body.terms().map(|(e, p)| TermJson { h: e.h, xi: e.xi, coef: p.to_string() }).collect(),
        }
    }

    pub fn to_log_symbol(&self, policy: TruncationPolicy) -> Result<LogSymbol, ParseError> {
        let mut body = Symbol::zero(policy);
        for t in &self.terms {
            body.add_term(Exp::new(t.h, t.xi), t.coef.parse()?);
        }
        let log_coef = match &self.log {
            Some(l) => parse_alpha(l)?,
            None => AlphaSeries::zero(),
        };
        Ok(LogSymbol::new(log_coef, body))
    }
}

#[derive(Serialize, Deserialize)]
struct NamedJson {
    name: String,
    #[serde(flatten)]
    symbol: SymbolJson,
}

pub fn symbol_to_json(s: &LogSymbol) -> String {
    serde_json::to_string_pretty(&SymbolJson::from_log_symbol(s)).expect("serializing plain data cannot fail")
}

pub fn symbol_from_json(text: &str, policy: TruncationPolicy) -> Result<LogSymbol, ParseError> {
    let j: SymbolJson = serde_json::from_str(text).map_err(|e| ParseError::new(format!("invalid JSON symbol: {e}")))?;
    j.to_log_symbol(policy)
}

/// Rational as text, for reports.
pub fn rational_text(r: &Rational) -> String {
    crate::algebra::rational::format_rational(r)
}
