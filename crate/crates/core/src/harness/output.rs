//! Number formatting and the CSV/JSON writers.
//!
//! Floats are printed with 9 significant digits; CSV files use `,` as the
//! delimiter, `.` as the decimal separator and `\n` line endings.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// `v` rounded to 9 significant digits, printed without trailing zeros.
pub fn fmt_sig(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if (1e-5..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

/// Builds a CSV document from a header and rows of already formatted cells.
pub fn csv_document<I, R>(header: &[String], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Sorted sample against the quantiles of `Normal(mean, variance)` at the
/// plotting positions `(i + 0.5) / M`.
pub fn plot_data_csv(values: &[f64], mean: f64, variance: f64) -> Result<String> {
    let normal = Normal::new(mean, variance.sqrt())
        .map_err(|e| Error::InvalidParameter(format!("reference normal: {e}")))?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let header = ["rank", "value", "normal_quantile"].map(String::from);
    Ok(csv_document(
        &header,
        sorted.iter().enumerate().map(|(i, &v)| {
            let q = normal.inverse_cdf((i as f64 + 0.5) / m);
            vec![i.to_string(), fmt_sig(v), fmt_sig(q)]
        }),
    ))
}
