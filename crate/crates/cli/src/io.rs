//! Reading inputs and writing artifacts. Nothing is written unless the whole
//! command succeeded.

use std::path::{Path, PathBuf};

use hkp_core::symbol::format::{symbol_from_json, Bundle};
use hkp_core::symbol::TruncationPolicy;

use crate::config::Format;
use crate::Failure;

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

/// A text bundle, a bare text symbol, a JSON bundle or a single JSON symbol.
pub fn parse_bundle(text: &str, policy: TruncationPolicy) -> Result<Bundle, Failure> {
    let t = text.trim_start();
    if t.starts_with('{') {
        let mut b = Bundle::new();
        b.push("", symbol_from_json(text, policy)?);
        return Ok(b);
    }
    if t.starts_with('[') {
        if let Ok(b) = Bundle::from_json(text, policy) {
            return Ok(b);
        }
    }
    Ok(Bundle::parse(text, policy)?)
}

pub fn read_bundle(path: &Path, policy: TruncationPolicy) -> Result<Bundle, Failure> {
    parse_bundle(&read_text(path)?, policy)
}

pub fn render(bundle: &Bundle, format: Format) -> String {
    match format {
        Format::Text => bundle.to_text(),
        Format::Json => bundle.to_json() + "\n",
    }
}

/// Writes to `output` or stdout.
pub fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
