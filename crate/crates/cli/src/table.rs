//! CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

/// Formats a finite float; NaN and infinities are internal errors.
pub fn float(x: f64) -> CliResult<String> {
    if x.is_finite() {
        Ok(format!("{x}"))
    } else {
        Err(CliError::Internal(anyhow::anyhow!("non-finite value {x} in CSV output")))
    }
}

/// Writes `rows` under `header` to `dir/name` and returns the path.
pub fn write(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        w.write_record(r)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(float(f64::NAN).is_err());
        assert!(float(f64::INFINITY).is_err());
        assert_eq!(float(0.25).unwrap(), "0.25");
    }
}
