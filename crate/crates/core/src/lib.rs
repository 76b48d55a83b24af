//! Exact symbolic engine for the hbar-dependent KP hierarchy.

pub mod algebra;
pub mod dkp;
pub mod error;
pub mod golden;
pub mod lie;
pub mod solver;
pub mod symbol;
pub mod tau;
pub mod wkb;

pub use error::{Error, ParseError, Result};
