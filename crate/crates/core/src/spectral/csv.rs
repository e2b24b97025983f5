//! Two-column spectrum files: a `wavelength_um,value` header followed by one
//! row per channel, LF line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const HEADER: &str = "wavelength_um,value";

/// Raw contents of a spectrum file, before any grid validation.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    pub wavelengths: Vec<f64>,
    pub values: Vec<f64>,
    /// 1-based file line number of each data row.
    pub lines: Vec<usize>,
}

pub fn parse_spectrum_csv(path: &Path, text: &str) -> Result<SpectrumTable> {
    let mut rows = text.lines().enumerate();
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    match rows.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((_, h)) => {
            return Err(parse_err(1, format!("expected header `{HEADER}`, found `{h}`")))
        }
        None => return Err(parse_err(1, "empty file".into())),
    }
    let mut table = SpectrumTable {
        wavelengths: Vec::new(),
        values: Vec::new(),
        lines: Vec::new(),
    };
    for (i, row) in rows {
        let line = i + 1;
        if row.trim().is_empty() {
            continue;
        }
        let mut cols = row.split(',');
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(parse_err(line, "expected exactly two columns".into()));
        };
        let w: f64 = a
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad wavelength `{a}`")))?;
        let v: f64 = b
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad value `{b}`")))?;
        if !w.is_finite() || !v.is_finite() {
            return Err(parse_err(line, "non-finite number".into()));
        }
        table.wavelengths.push(w);
        table.values.push(v);
        table.lines.push(line);
    }
    if table.wavelengths.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(table)
}

pub fn read_spectrum_csv(path: &Path) -> Result<SpectrumTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spectrum_csv(path, &text)
}

pub fn format_spectrum_csv(wavelengths: &[f64], values: &[f64]) -> String {
    let mut s = String::with_capacity(32 * wavelengths.len() + HEADER.len() + 1);
    s.push_str(HEADER);
    s.push('\n');
    for (w, v) in wavelengths.iter().zip(values) {
        // `{}` on f64 is the shortest representation that parses back exactly
        let _ = writeln!(s, "{w},{v}");
    }
    s
}

pub fn write_spectrum_csv(path: &Path, wavelengths: &[f64], values: &[f64]) -> Result<()> {
    fs::write(path, format_spectrum_csv(wavelengths, values)).map_err(|e| Error::io(path, e))
}
