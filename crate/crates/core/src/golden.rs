//! Published Kontsevich-model expansions and the pipeline that recomputes them.
//!
//! The table lives in `data/kontsevich_golden.txt`: `[name]` headers, `@ display:`
//! and `@ alpha:` annotations, `@ gap: h xi` markers for coefficients left out of
//! the published series, and symbol lines in the usual text form. Only the listed
//! `(hbar, xi)` positions are compared.

use std::fmt;

use crate::algebra::{Poly, Rational};
use crate::dkp::{dkp_dress, kontsevich_bootstrap, DispersionlessPair};
use crate::error::{Error, ParseError, Result};
use crate::solver::{guard_for_depth, kontsevich_problem, rh_solve, Solution};
use crate::symbol::calculus::pow;
use crate::symbol::format::{parse_alpha, parse_symbol, rational_text};
use crate::symbol::{Exp, Symbol, TruncationPolicy};

pub const KONTSEVICH_GOLDEN: &str = include_str!("../data/kontsevich_golden.txt");

/// Deepest level of the published table.
pub const KONTSEVICH_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected {
    Symbol(Symbol),
    Alpha(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenEntry {
    pub name: String,
    pub display: Option<String>,
    pub expected: Expected,
    /// Positions omitted from the published series.
    pub gaps: Vec<Exp>,
}

impl GoldenEntry {
    /// Printed `(hbar, xi)` positions, in canonical order.
    pub fn keys(&self) -> Vec<Exp> {
        match &self.expected {
            Expected::Symbol(s) => s.terms().map(|(e, _)| *e).collect(),
            Expected::Alpha(_) => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenTable {
    pub entries: Vec<GoldenEntry>,
}

/// Wide enough to hold every printed coefficient exactly.
fn table_policy() -> TruncationPolicy {
    TruncationPolicy::new(i32::MIN / 2, u32::MAX / 2, 0)
}

impl GoldenTable {
    pub fn kontsevich() -> GoldenTable {
        GoldenTable::parse(KONTSEVICH_GOLDEN).expect("shipped golden table parses")
    }

    pub fn get(&self, name: &str) -> Option<&GoldenEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn parse(text: &str) -> Result<GoldenTable, ParseError> {
        struct Pending {
            name: String,
            display: Option<String>,
            alpha: Option<Rational>,
            gaps: Vec<Exp>,
            body: String,
        }
        fn finish(p: Pending) -> Result<GoldenEntry, ParseError> {
            let expected = match p.alpha {
                Some(a) if p.body.trim().is_empty() => Expected::Alpha(a),
                Some(_) => return Err(ParseError::new(format!("[{}] mixes an alpha with symbol lines", p.name))),
                None => Expected::Symbol(parse_symbol(&p.body, table_policy())?),
            };
            Ok(GoldenEntry { name: p.name, display: p.display, expected, gaps: p.gaps })
        }

        let mut entries = Vec::new();
        let mut cur: Option<Pending> = None;
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if let Some(p) = cur.take() {
                    entries.push(finish(p)?);
                }
                cur = Some(Pending {
                    name: name.to_string(),
                    display: None,
                    alpha: None,
                    gaps: Vec::new(),
                    body: String::new(),
                });
                continue;
            }
            let p = cur.as_mut().ok_or_else(|| ParseError::new(format!("line before any [name]: `{line}`")))?;
            if let Some(note) = line.strip_prefix('@') {
                let (key, value) = note
                    .split_once(':')
                    .ok_or_else(|| ParseError::new(format!("missing `:` in annotation `{line}`")))?;
                let value = value.trim();
                match key.trim() {
                    "display" => p.display = Some(value.to_string()),
                    "alpha" => p.alpha = Some(parse_alpha(value)?.get(0)),
                    "gap" => {
                        let nums: Vec<i64> = value
                            .split_whitespace()
                            .map(|v| v.parse().map_err(|_| ParseError::new(format!("bad gap `{value}`"))))
                            .collect::<Result<_, _>>()?;
                        let [h, xi] = nums[..] else {
                            return Err(ParseError::new(format!("gap needs `h xi`, got `{value}`")));
                        };
                        if h < 0 {
                            return Err(ParseError::new(format!("negative hbar power in gap `{value}`")));
                        }
                        p.gaps.push(Exp::new(h as u32, xi as i32));
                    }
                    other => return Err(ParseError::new(format!("unknown annotation `{other}`"))),
                }
                continue;
            }
            p.body.push_str(line);
            p.body.push('\n');
        }
        if let Some(p) = cur.take() {
            entries.push(finish(p)?);
        }
        Ok(GoldenTable { entries })
    }
}

/// Everything the published table names, recomputed.
#[derive(Clone, Debug)]
pub struct KontsevichRun {
    /// Positions below `report.xi_floor` are not trusted and are cut away.
    pub report: TruncationPolicy,
    pub work: TruncationPolicy,
    pub x0: Symbol,
    pub alpha0: Rational,
    pub dispersionless: DispersionlessPair,
    pub solution: Solution,
}

/// Bootstraps the seed and solves to `depth` at `report` deepened by `margin`
/// extra xi-levels on top of [`guard_for_depth`].
pub fn run_kontsevich(report: TruncationPolicy, depth: usize, margin: u32) -> Result<KontsevichRun> {
    let work = report.deepen(guard_for_depth(depth) + margin);
    let (x0, alpha0) = kontsevich_bootstrap(work)?;
    let dispersionless = dkp_dress(&x0, &alpha0, 0)?;
    let solution = rh_solve(&kontsevich_problem(work), &x0, &alpha0, depth)?;
    Ok(KontsevichRun { report, work, x0, alpha0, dispersionless, solution })
}

impl KontsevichRun {
    pub fn depth(&self) -> usize {
        self.solution.steps.len()
    }

    fn cut(&self, s: &Symbol) -> Symbol {
        s.cut_below(self.report.xi_floor).with_policy(self.report)
    }

    /// The quantity a golden entry names, or `None` past the computed depth.
    pub fn lookup(&self, name: &str) -> Option<Expected> {
        let sym = |s: &Symbol| Some(Expected::Symbol(self.cut(s)));
        let level = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix)?.parse().ok() };
        // `P^(i)`, `P_j^(i)`
        let superscript = |head: &str| -> Option<(Option<usize>, usize)> {
            let rest = name.strip_prefix(head)?;
            let (sub, sup) = rest.split_once("^(")?;
            let i: usize = sup.strip_suffix(')')?.parse().ok()?;
            let j = if sub.is_empty() { None } else { Some(sub.strip_prefix('_')?.parse().ok()?) };
            Some((j, i))
        };
        let sol = &self.solution;
        match name {
            "L^2" => return sym(&pow(&self.dispersionless.l, 2)),
            "M" => return sym(&self.dispersionless.m),
            "P_0" => return sym(&sol.pairs[0].0.sigma(0)),
            "Q_0" => return sym(&sol.pairs[0].1.sigma(0)),
            _ => {}
        }
        if let Some(i) = level("alpha_") {
            return match i {
                0 => Some(Expected::Alpha(self.alpha0.clone())),
                _ if i <= self.depth() => Some(Expected::Alpha(sol.data.alpha(i))),
                _ => None,
            };
        }
        if let Some(i) = level("Xt_") {
            return if (1..=self.depth()).contains(&i) { sym(&sol.steps[i - 1].tilde.body) } else { None };
        }
        if let Some(i) = level("X_") {
            return match i {
                0 => sym(&self.x0),
                _ => sol.data.xs.get(i).and_then(sym),
            };
        }
        for (head, first) in [("P", true), ("Q", false)] {
            if let Some((j, i)) = superscript(head) {
                let (p, q) = sol.pairs.get(i)?;
                let s = if first { p } else { q };
                return match j {
                    None => sym(s),
                    Some(j) => sym(&s.sigma(-(j as i32))),
                };
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass {
        checked: usize,
    },
    Mismatch {
        at: Option<Exp>,
        expected: String,
        found: String,
    },
    /// Printed positions the report policy cannot vouch for.
    Unreachable(Vec<Exp>),
    /// Not produced by this run (depth too small).
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryVerdict {
    pub name: String,
    pub outcome: Outcome,
}

impl EntryVerdict {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Outcome::Pass { .. })
    }
}

impl fmt::Display for EntryVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Pass { checked } => write!(f, "PASS {:<10} {checked} coefficients", self.name),
            Outcome::Mismatch { at: Some(e), expected, found } => {
                write!(f, "FAIL {:<10} h^{} xi^{}: expected {expected}, found {found}", self.name, e.h, e.xi)
            }
            Outcome::Mismatch { at: None, expected, found } => {
                write!(f, "FAIL {:<10} expected {expected}, found {found}", self.name)
            }
            Outcome::Unreachable(keys) => {
                let list: Vec<String> = keys.iter().map(|e| format!("h^{} xi^{}", e.h, e.xi)).collect();
                write!(f, "FAIL {:<10} outside the truncation window: {}", self.name, list.join(", "))
            }
            Outcome::Missing => write!(f, "FAIL {:<10} not computed at this depth", self.name),
        }
    }
}

pub fn compare_entry(entry: &GoldenEntry, computed: Option<&Expected>, report: &TruncationPolicy) -> EntryVerdict {
    let name = entry.name.clone();
    let outcome = match (&entry.expected, computed) {
        (_, None) => Outcome::Missing,
        (Expected::Alpha(a), Some(Expected::Alpha(b))) => {
            if a == b {
                Outcome::Pass { checked: 1 }
            } else {
                Outcome::Mismatch { at: None, expected: rational_text(a), found: rational_text(b) }
            }
        }
        (Expected::Symbol(want), Some(Expected::Symbol(got))) => {
            let unreachable: Vec<Exp> = entry.keys().into_iter().filter(|e| !report.admits(*e)).collect();
            if !unreachable.is_empty() {
                Outcome::Unreachable(unreachable)
            } else {
                let bad = want.terms().find(|(e, p)| got.coeff(e.h, e.xi) != **p);
                match bad {
                    Some((e, p)) => Outcome::Mismatch {
                        at: Some(*e),
                        expected: p.to_string(),
                        found: got.coeff(e.h, e.xi).to_string(),
                    },
                    None => Outcome::Pass { checked: want.len() },
                }
            }
        }
        _ => Outcome::Mismatch { at: None, expected: "matching kind".into(), found: "other kind".into() },
    };
    EntryVerdict { name, outcome }
}

/// The computed value at a position the published series leaves out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapVerdict {
    pub name: String,
    pub at: Exp,
    pub value: Option<Poly>,
}

impl fmt::Display for GapVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Some(v) => write!(f, "{} h^{} xi^{} = {v}", self.name, self.at.h, self.at.xi),
            None => write!(f, "{} h^{} xi^{} not computed", self.name, self.at.h, self.at.xi),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub entries: Vec<EntryVerdict>,
    pub gaps: Vec<GapVerdict>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(EntryVerdict::passed)
    }

    pub fn first_failure(&self) -> Option<&EntryVerdict> {
        self.entries.iter().find(|e| !e.passed())
    }

    pub fn get(&self, name: &str) -> Option<&EntryVerdict> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub fn verify(table: &GoldenTable, run: &KontsevichRun) -> VerifyReport {
    let mut entries = Vec::with_capacity(table.entries.len());
    let mut gaps = Vec::new();
    for entry in &table.entries {
        let computed = run.lookup(&entry.name);
        entries.push(compare_entry(entry, computed.as_ref(), &run.report));
        for at in &entry.gaps {
            let value = match &computed {
                Some(Expected::Symbol(s)) if run.report.admits(*at) => Some(s.coeff(at.h, at.xi)),
                _ => None,
            };
            gaps.push(GapVerdict { name: entry.name.clone(), at: *at, value });
        }
    }
    VerifyReport { entries, gaps }
}

/// Names of the table entries on which two runs at the same report policy
/// disagree; empty when the deeper run only confirms the shallower one.
pub fn rerun_differences(table: &GoldenTable, a: &KontsevichRun, b: &KontsevichRun) -> Vec<String> {
    table.entries.iter().filter(|e| a.lookup(&e.name) != b.lookup(&e.name)).map(|e| e.name.clone()).collect()
}

/// Runs the full pipeline at `report` and diffs every entry of the shipped table.
pub fn verify_kontsevich(report: TruncationPolicy, margin: u32) -> Result<VerifyReport> {
    if (report.hbar_cap as usize) < KONTSEVICH_DEPTH {
        return Err(Error::Truncation(format!(
            "hbar cap {} is below the table depth {KONTSEVICH_DEPTH}",
            report.hbar_cap
        )));
    }
    let run = run_kontsevich(report, KONTSEVICH_DEPTH, margin)?;
    Ok(verify(&GoldenTable::kontsevich(), &run))
}
