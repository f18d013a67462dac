//! Artifact writers. Every file is written to a temporary sibling and
//! renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, &target)
        .map_err(|e| CliError::Io(format!("cannot rename to {}: {e}", target.display())))?;
    Ok(target)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

/// Shortest representation that parses back to the same `f64`.
pub fn number(v: f64) -> String {
    format!("{v:?}")
}

/// CSV with a header row and one row per entry of `rows`.
pub fn write_csv(dir: &Path, name: &str, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<PathBuf, CliError> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            let _ = write!(text, "{}", number(*v));
        }
        text.push('\n');
    }
    write_atomic(dir, name, text.as_bytes())
}
