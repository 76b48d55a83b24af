use std::path::PathBuf;

use clap::ValueEnum;
use hkp_core::symbol::format::{symbol_to_json, symbol_to_text};
use hkp_core::symbol::{LogSymbol, Symbol, TruncationPolicy};
use hkp_core::wkb::{s_to_x, x_to_s, WKBPhase};

use crate::config::{Format, RunConfig};
use crate::{io, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Exponent X (hbar-power n holds X_n) to phase S.
    ToS,
    /// Phase S back to the exponent X.
    ToX,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(value_enum)]
    pub direction: Direction,
    /// A single symbol, text or JSON; empty means zero.
    #[arg(long)]
    pub input: PathBuf,
    /// Convert back and fail unless the input is recovered.
    #[arg(long)]
    pub roundtrip: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub config: RunConfig,
}

/// Empty input reads as the zero symbol.
fn read_symbol(args: &Args, policy: TruncationPolicy) -> Result<Symbol, Failure> {
    let b = io::read_bundle(&args.input, policy)?;
    match b.entries.as_slice() {
        [] => Ok(Symbol::zero(policy)),
        [(_, s)] if s.log_coef.is_zero() => Ok(s.body.clone()),
        _ => Err(Failure::Input(format!("{}: expected a single plain symbol", args.input.display()))),
    }
}

fn convert(direction: Direction, s: &Symbol) -> Result<Symbol, Failure> {
    Ok(match direction {
        Direction::ToS => x_to_s(&s.h_slices())?.to_symbol(),
        Direction::ToX => Symbol::from_slices(s.policy(), &s_to_x(&WKBPhase::from_symbol(s)?)?),
    })
}

fn reverse(direction: Direction) -> Direction {
    match direction {
        Direction::ToS => Direction::ToX,
        Direction::ToX => Direction::ToS,
    }
}

pub fn run(args: Args) -> Result<(), Failure> {
    let config = &args.config;
    let policy = config.policy();
    let deep = policy.deepen(config.guard_margin);
    let deep_input = read_symbol(&args, deep)?;
    let input = deep_input.cut_below(policy.xi_floor).with_policy(policy);
    let out = convert(args.direction, &input)?;
    if args.roundtrip && convert(reverse(args.direction), &out)? != input {
        return Err(Failure::Compute("roundtrip did not recover the input".into()));
    }
    if config.guard_margin > 0 {
        let again = convert(args.direction, &deep_input)?.cut_below(policy.xi_floor).with_policy(policy);
        if again != out {
            return Err(Failure::Compute(format!(
                "rerun with {} extra xi-levels changed the result",
                config.guard_margin
            )));
        }
    }
    let text = match config.format {
        Format::Text => symbol_to_text(&out),
        Format::Json => symbol_to_json(&LogSymbol::plain(out)) + "\n",
    };
    io::emit(&text, args.output.as_ref())
}
