//! Instance files. JSON is the native format and round-trips exactly; MPS
//! is import only.

mod json;
mod mps;

use std::fs;
use std::path::Path;

use divekit_core::MilpInstance;

pub use json::{from_json, to_json, INSTANCE_VERSION};
pub use mps::read_mps;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unsupported feature: {what}")]
    UnsupportedFeature { line: usize, what: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("version mismatch: found {found}, expected {expected}")]
    Version { found: String, expected: String },
    #[error("unknown file extension for {0}")]
    UnknownExtension(String),
}

fn is_mps(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mps"))
}

/// Reads `.json` or `.mps` by extension.
pub fn read_instance(path: &Path) -> Result<MilpInstance, FormatError> {
    let text = fs::read_to_string(path)?;
    if is_mps(path) {
        read_mps(&text)
    } else if path.extension().is_some_and(|e| e == "json") {
        from_json(&text)
    } else {
        Err(FormatError::UnknownExtension(path.display().to_string()))
    }
}

/// Writes the native JSON format regardless of extension, except that an
/// `.mps` target is rejected.
pub fn write_instance(inst: &MilpInstance, path: &Path) -> Result<(), FormatError> {
    if is_mps(path) {
        return Err(FormatError::UnsupportedFeature { line: 0, what: "writing MPS".into() });
    }
    fs::write(path, to_json(inst))?;
    Ok(())
}
