//! CSV emission: `.` decimals, `\n` line endings, header always present,
//! floats at six significant digits.

use std::io::Write;
use std::path::Path;

use crate::CliFailure;

/// Formats with six significant digits in plain decimal notation.
pub fn sig6(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Writes the finished CSV text to the path or standard output.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliFailure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliFailure::input_file(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliFailure::input_file(format!("cannot write to stdout: {e}")))
        }
    }
}
