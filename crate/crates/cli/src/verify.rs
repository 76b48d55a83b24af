use hkp_core::golden::{rerun_differences, run_kontsevich, verify, GoldenTable, KONTSEVICH_DEPTH};

use crate::config::RunConfig;
use crate::Failure;

#[derive(clap::Args)]
pub struct Args {
    /// Only `kontsevich` ships a table.
    #[arg(long, default_value = "kontsevich")]
    pub problem: String,
    #[command(flatten)]
    pub config: RunConfig,
}

pub fn run(args: Args) -> Result<(), Failure> {
    if args.problem != "kontsevich" {
        return Err(Failure::Input(format!("no golden table for `{}`", args.problem)));
    }
    let config = &args.config;
    if (config.hbar_cap as usize) < KONTSEVICH_DEPTH {
        return Err(Failure::Input(format!("--hbar-cap must be at least {KONTSEVICH_DEPTH}")));
    }
    config.check_depth(KONTSEVICH_DEPTH);
    let table = GoldenTable::kontsevich();
    let report = config.policy();
    let run = run_kontsevich(report, KONTSEVICH_DEPTH, 0)?;
    let verdict = verify(&table, &run);
    for e in &verdict.entries {
        println!("{e}");
    }
    for g in &verdict.gaps {
        println!("gap {g}");
    }
    if let Some(first) = verdict.first_failure() {
        return Err(Failure::Compute(first.to_string()));
    }
    if config.guard_margin > 0 {
        let deep = run_kontsevich(report, KONTSEVICH_DEPTH, config.guard_margin)?;
        let differ = rerun_differences(&table, &run, &deep);
        if !differ.is_empty() {
            return Err(Failure::Compute(format!(
                "rerun with {} extra xi-levels changed {}",
                config.guard_margin,
                differ.join(", ")
            )));
        }
        println!("rerun with {} extra xi-levels: identical", config.guard_margin);
    }
    Ok(())
}
