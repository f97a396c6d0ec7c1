//! Output formatting: locale-independent CSV with 12 significant digits,
//! and JSON mirroring the same columns.

use std::io::Write;
use std::path::Path;

use crate::Failure;

/// 12 significant digits, `.` decimal separator, exponent notation.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// `NA` marks a value that does not exist for the row.
pub fn fmt12_opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_else(|| "NA".to_string())
}

pub fn fmt_count_opt(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "NA".to_string())
}

/// Write to the given path, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let mut file = std::fs::File::create(path).map_err(|e| Failure {
                code: 5,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            file.write_all(content.as_bytes()).map_err(|e| Failure {
                code: 5,
                message: format!("cannot write {}: {e}", path.display()),
            })
        }
    }
}
