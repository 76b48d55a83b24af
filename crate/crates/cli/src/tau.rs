use std::path::PathBuf;

use hkp_core::algebra::{Poly, Var};
use hkp_core::symbol::format::parse_symbol;
use hkp_core::tau::{extract_v, f_gradients, genus_parity_check, integrate_f, FGradient, TauGradient};
use hkp_core::wkb::WKBPhase;

use crate::config::RunConfig;
use crate::{io, warn, Failure};

#[derive(clap::Args)]
pub struct Args {
    /// A WKB phase symbol (hbar-power n holds S_n) or a table of `v[n][k] : poly` lines.
    #[arg(long)]
    pub input: PathBuf,
    /// Read x as t_1 (for phases computed at t = 0 with x standing in for t_1).
    #[arg(long)]
    pub absorb_x: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub config: RunConfig,
}

fn is_v_table(text: &str) -> bool {
    text.lines().map(str::trim).any(|l| l.starts_with("v["))
}

/// Pairs `(j, k)` with `d/dt_k dF/dt_j != d/dt_j dF/dt_k`.
fn unclosed_pairs(grads: &[Poly]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 1..=grads.len() {
        for k in (j + 1)..=grads.len() {
            if grads[j - 1].diff(Var::T(k as u32)) != grads[k - 1].diff(Var::T(j as u32)) {
                out.push((j, k));
            }
        }
    }
    out
}

fn describe_missing(g: &FGradient) -> String {
    let parts: Vec<String> = g.missing.iter().map(|(k, l)| format!("d/dt{k} v[.][{l}]")).collect();
    parts.join(", ")
}

pub fn run(args: Args) -> Result<(), Failure> {
    let config = &args.config;
    let text = io::read_text(&args.input)?;
    let mut v = if is_v_table(&text) {
        TauGradient::parse(&text, config.t_cap)?
    } else {
        let s = parse_symbol(&text, config.policy())?;
        extract_v(&WKBPhase::from_symbol(&s)?)
    };
    if args.absorb_x {
        v = v.absorb_x_into_t1()?;
    }
    if config.t_cap == 0 && v.levels() > 1 {
        warn("--t-cap 0: gradients past level 0 need time derivatives and stay incomplete");
    }

    let mut out = String::from("[v]\n");
    out.push_str(&v.to_text());
    let mut grads_out = String::from("\n[gradients]\n");
    let mut f_out = String::from("\n[F]\n");
    let mut unclosed = Vec::new();
    for n in 0..v.levels() {
        let grads = f_gradients(&v, n)?;
        for (i, g) in grads.iter().enumerate() {
            if !g.value.is_zero() || !g.is_complete() {
                grads_out.push_str(&format!("dF_{n}/dt{} : {}", i + 1, g.value));
                if !g.is_complete() {
                    grads_out.push_str(&format!("  # incomplete, needs {}", describe_missing(g)));
                }
                grads_out.push('\n');
            }
        }
        if grads.iter().any(|g| !g.is_complete()) {
            f_out.push_str(&format!("F_{n} : incomplete\n"));
            continue;
        }
        let values: Vec<Poly> = grads.into_iter().map(|g| g.value).collect();
        let pairs = unclosed_pairs(&values);
        if pairs.is_empty() {
            f_out.push_str(&format!("F_{n} : {}\n", integrate_f(&values)?));
        } else {
            for (j, k) in pairs {
                f_out.push_str(&format!("F_{n} : not closed in (t{j}, t{k})\n"));
                unclosed.push(format!("F_{n} in (t{j}, t{k})"));
            }
        }
    }
    out.push_str(&grads_out);
    out.push_str(&f_out);
    out.push_str("\n[parity]\n");
    let violations = genus_parity_check(&v);
    if violations.is_empty() {
        out.push_str("odd levels vanish\n");
    }
    for p in violations {
        let partial = if p.partial { "  # partial" } else { "" };
        out.push_str(&format!("dF_{}/dt{} : {}{partial}\n", 2 * p.m + 1, p.j, p.value));
    }
    if !unclosed.is_empty() {
        eprint!("{out}");
        return Err(Failure::Compute(format!("gradients not closed: {}", unclosed.join("; "))));
    }
    io::emit(&out, args.output.as_ref())
}
