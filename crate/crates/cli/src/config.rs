use clap::ValueEnum;
use hkp_core::symbol::TruncationPolicy;

use crate::warn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Truncation and output settings common to all commands.
#[derive(clap::Args, Clone, Debug)]
pub struct RunConfig {
    /// Most negative power of xi kept in reported results.
    #[arg(long, default_value_t = -16, allow_negative_numbers = true)]
    pub xi_floor: i32,
    /// Highest power of hbar kept.
    #[arg(long, default_value_t = 6)]
    pub hbar_cap: u32,
    /// Highest total degree in the times t_1, t_2, ... kept.
    #[arg(long, default_value_t = 0)]
    pub t_cap: u32,
    /// Extra xi-levels for a confirming rerun; 0 disables it.
    #[arg(long, default_value_t = 0)]
    pub guard_margin: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl RunConfig {
    pub fn policy(&self) -> TruncationPolicy {
        TruncationPolicy::new(self.xi_floor, self.hbar_cap, self.t_cap)
    }

    /// Warns when the floor is too shallow for `depth` solver levels to be
    /// meaningful at the reported precision.
    pub fn check_depth(&self, depth: usize) {
        let recommended = -2 * depth as i32 - 4;
        if self.xi_floor > recommended {
            warn(format!(
                "--xi-floor {} is shallower than {recommended}, the recommended floor for depth {depth}",
                self.xi_floor
            ));
        }
    }
}
