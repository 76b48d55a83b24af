use std::path::PathBuf;

use hkp_core::algebra::Rational;
use hkp_core::dkp::kontsevich_bootstrap;
use hkp_core::solver::{guard_for_depth, kontsevich_problem, rh_solve, RHProblem, Solution};
use hkp_core::symbol::format::{rational_text, Bundle};
use hkp_core::symbol::{AlphaSeries, LogSymbol, Symbol, TruncationPolicy};

use crate::config::Format;
use crate::config::RunConfig;
use crate::{io, Failure};

#[derive(clap::Args)]
pub struct Args {
    /// `kontsevich`, or a bundle file with sections [f], [g] and [X_0]
    /// (an optional `log :` line in [X_0] sets alpha_0).
    #[arg(long, default_value = "kontsevich")]
    pub problem: String,
    /// Number of levels N to solve beyond the seed.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Times t_1..t_n switched on in the dressing (needs --t-cap > 0 to matter).
    #[arg(long, default_value_t = 0)]
    pub times: u32,
    /// Write the bundle here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write one file `X_i.txt` per level into this directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub config: RunConfig,
}

struct Seeded {
    problem: RHProblem,
    x0: Symbol,
    alpha0: Rational,
}

fn load(args: &Args, work: TruncationPolicy) -> Result<Seeded, Failure> {
    if args.problem == "kontsevich" {
        let (x0, alpha0) = kontsevich_bootstrap(work)?;
        let mut problem = kontsevich_problem(work);
        problem.n_times = args.times;
        return Ok(Seeded { problem, x0, alpha0 });
    }
    let bundle = io::read_bundle(&PathBuf::from(&args.problem), work)?;
    let section = |name: &str| {
        bundle.get(name).cloned().ok_or_else(|| Failure::Input(format!("{}: missing section [{name}]", args.problem)))
    };
    let plain = |name: &str| -> Result<Symbol, Failure> {
        let s = section(name)?;
        if !s.log_coef.is_zero() {
            return Err(Failure::Input(format!("{}: [{name}] may not have a log line", args.problem)));
        }
        Ok(s.body)
    };
    let (f, g) = (plain("f")?, plain("g")?);
    let seed = section("X_0")?;
    if seed.log_coef.0.len() > 1 {
        return Err(Failure::Input(format!("{}: alpha_0 must not depend on h", args.problem)));
    }
    let problem = RHProblem::new(f, g, args.times)?;
    Ok(Seeded { problem, x0: seed.body, alpha0: seed.log_coef.get(0) })
}

fn solve_at(args: &Args, margin: u32) -> Result<Solution, Failure> {
    let report = args.config.policy();
    let work = report.deepen(guard_for_depth(args.depth) + margin);
    let s = load(args, work)?;
    Ok(rh_solve(&s.problem, &s.x0, &s.alpha0, args.depth)?)
}

fn to_bundle(sol: &Solution, report: TruncationPolicy) -> Bundle {
    let mut b = Bundle::new();
    for (i, x) in sol.data.xs.iter().enumerate() {
        let alpha = AlphaSeries::constant(sol.data.alpha(i));
        let body = x.cut_below(report.xi_floor).with_policy(report);
        b.push(format!("X_{i}"), LogSymbol::new(alpha.trimmed(), body));
    }
    b
}

fn leading(s: &Symbol) -> String {
    match s.terms().next() {
        Some((e, p)) => format!("h^{} xi^{} : {p}", e.h, e.xi),
        None => "0".into(),
    }
}

pub fn run(args: Args) -> Result<(), Failure> {
    let config = &args.config;
    if args.depth > config.hbar_cap as usize {
        return Err(Failure::Input(format!("--depth {} exceeds --hbar-cap {}", args.depth, config.hbar_cap)));
    }
    config.check_depth(args.depth);
    let report = config.policy();
    let sol = solve_at(&args, 0)?;
    eprintln!("level 0: alpha = {}, leading X term {}", rational_text(&sol.data.alpha(0)), leading(&sol.data.xs[0]));
    for step in &sol.steps {
        eprintln!(
            "level {}: alpha = {}, leading X term {}, compatible = {}",
            step.i,
            rational_text(&step.alpha),
            leading(&step.x.cut_below(report.xi_floor)),
            step.compatible
        );
    }
    let bundle = to_bundle(&sol, report);
    if config.guard_margin > 0 {
        let deep = to_bundle(&solve_at(&args, config.guard_margin)?, report);
        let differ: Vec<&str> =
            bundle.entries.iter().zip(&deep.entries).filter(|(a, b)| a != b).map(|(a, _)| a.0.as_str()).collect();
        if !differ.is_empty() {
            return Err(Failure::Compute(format!(
                "rerun with {} extra xi-levels changed {}; lower --xi-floor",
                config.guard_margin,
                differ.join(", ")
            )));
        }
        eprintln!("rerun with {} extra xi-levels: identical", config.guard_margin);
    }
    let text = io::render(&bundle, config.format);
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
        for (name, s) in &bundle.entries {
            let mut one = Bundle::new();
            one.push(name.clone(), s.clone());
            let ext = match config.format {
                Format::Text => "txt",
                Format::Json => "json",
            };
            io::emit(&io::render(&one, config.format), Some(&dir.join(format!("{name}.{ext}"))))?;
        }
    }
    if args.out_dir.is_none() || args.output.is_some() {
        io::emit(&text, args.output.as_ref())?;
    }
    Ok(())
}
