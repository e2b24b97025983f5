//! Result artifacts: CSV grids, 16-bit PGM with a scaling sidecar, PBM masks,
//! label grids and per-pixel diagnostics.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lwir_core::{Error, Result};

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        "nan".into()
    }
}

/// Row-major values as a CSV grid, one line per image row, no header.
pub fn format_grid_csv(width: usize, values: &[f64]) -> String {
    let mut s = String::new();
    for row in values.chunks(width) {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_grid_csv(path: &Path, width: usize, values: &[f64]) -> Result<()> {
    write(path, format_grid_csv(width, values))
}

pub fn read_grid_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        reason: format!("bad number `{c}`"),
                    })
                })
                .collect()
        })
        .collect()
}

/// Sidecar path for a PGM: `depth.pgm` -> `depth.pgm.scale.txt`.
pub fn pgm_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".scale.txt");
    PathBuf::from(s)
}

/// 16-bit binary PGM scaled linearly over the finite range of `values`.
/// Non-finite pixels map to 0. Returns `(min, max)`.
pub fn write_pgm16(path: &Path, height: usize, width: usize, values: &[f64]) -> Result<(f64, f64)> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;
    let mut bytes = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for &v in values {
        let q = if !v.is_finite() {
            0
        } else if span > 0.0 {
            (((v - lo) / span) * 65535.0).round() as u16
        } else {
            0
        };
        bytes.extend_from_slice(&q.to_be_bytes());
    }
    write(path, bytes)?;
    let side = format!(
        "# value = min + (max - min) * pixel / 65535; pixel 0 also marks undefined values\nmin = {}\nmax = {}\n",
        lo, hi
    );
    write(&pgm_sidecar(path), side)?;
    Ok((lo, hi))
}

/// Plain PBM; 1 (black) marks flagged pixels.
pub fn write_pbm(path: &Path, height: usize, width: usize, flagged: &[bool]) -> Result<()> {
    let mut s = format!("P1\n{width} {height}\n");
    for row in flagged.chunks(width) {
        let bits: Vec<&str> = row.iter().map(|&f| if f { "1" } else { "0" }).collect();
        s.push_str(&bits.join(" "));
        s.push('\n');
    }
    write(path, s)
}

pub fn write_labels_csv(path: &Path, width: usize, labels: &[usize]) -> Result<()> {
    let mut s = String::new();
    for row in labels.chunks(width) {
        let cells: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    write(path, s)
}

/// One estimator outcome per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelRecord {
    /// NaN when the estimate is undefined.
    pub d_hat: f64,
    pub t_hat: Option<f64>,
    pub loss: Option<f64>,
    pub converged: bool,
    pub reliable: bool,
}

pub const DIAGNOSTICS_HEADER: &str = "row,col,d_hat,T_hat,loss,converged,reliable";

pub fn write_diagnostics(path: &Path, width: usize, records: &[PixelRecord]) -> Result<()> {
    let mut s = String::from(DIAGNOSTICS_HEADER);
    s.push('\n');
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            i / width,
            i % width,
            num(r.d_hat),
            opt(r.t_hat),
            opt(r.loss),
            r.converged,
            r.reliable
        );
    }
    write(path, s)
}

/// `row,col,<one column per wavelength>` with one line per pixel.
pub fn write_profiles_csv(path: &Path, width: usize, wavelengths: &[f64], profiles: &[Vec<f64>]) -> Result<()> {
    let mut s = String::from("row,col");
    for w in wavelengths {
        let _ = write!(s, ",{w}");
    }
    s.push('\n');
    for (i, p) in profiles.iter().enumerate() {
        let _ = write!(s, "{},{}", i / width, i % width);
        for v in p {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    write(path, s)
}

/// Inverse of [`write_profiles_csv`]: `(width, wavelengths, profiles)`.
pub fn read_profiles_csv(path: &Path) -> Result<(usize, Vec<f64>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "row" || cols[1] != "col" {
        return Err(bad(1, "header must start with `row,col`".into()));
    }
    let wavelengths = cols[2..]
        .iter()
        .map(|c| c.parse::<f64>().map_err(|_| bad(1, format!("bad wavelength `{c}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut profiles = Vec::new();
    let mut width = 0;
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols.len() {
            return Err(bad(i + 2, format!("{} fields, expected {}", cells.len(), cols.len())));
        }
        let row: usize = cells[0].parse().map_err(|_| bad(i + 2, "bad row".into()))?;
        let col: usize = cells[1].parse().map_err(|_| bad(i + 2, "bad col".into()))?;
        if row == 0 {
            width = width.max(col + 1);
        }
        let expected = if width > 0 { (row * width + col, profiles.len()) } else { (0, 0) };
        if expected.0 != expected.1 {
            return Err(bad(i + 2, format!("pixel ({row}, {col}) out of order")));
        }
        profiles.push(
            cells[2..]
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| bad(i + 2, format!("bad value `{c}`"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if profiles.is_empty() {
        return Err(bad(2, "no pixels".into()));
    }
    Ok((width, wavelengths, profiles))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        let v = vec![1.0, 2.5, 1.0 / 3.0, 1e-300, 123456.789, -0.0];
        write_grid_csv(&p, 3, &v).unwrap();
        let back = read_grid_csv(&p).unwrap();
        assert_eq!(back.len(), 2);
        let flat: Vec<f64> = back.into_iter().flatten().collect();
        assert_eq!(flat, v);
    }

    #[test]
    fn pgm_scaling_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.pgm");
        let (lo, hi) = write_pgm16(&p, 1, 3, &[10.0, 20.0, f64::NAN]).unwrap();
        assert_eq!((lo, hi), (10.0, 20.0));
        let bytes = fs::read(&p).unwrap();
        let head = b"P5\n3 1\n65535\n";
        assert_eq!(&bytes[..head.len()], head);
        assert_eq!(&bytes[head.len()..], &[0, 0, 255, 255, 0, 0]);
        let side = fs::read_to_string(pgm_sidecar(&p)).unwrap();
        assert!(side.contains("min = 10\n") && side.contains("max = 20\n"));
    }

    #[test]
    fn pbm_and_diagnostics_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pbm");
        write_pbm(&p, 2, 2, &[true, false, false, true]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "P1\n2 2\n1 0\n0 1\n");

        let d = dir.path().join("diag.csv");
        let rec = PixelRecord { d_hat: 99.5, t_hat: Some(286.5), loss: Some(0.25), converged: true, reliable: false };
        let undefined = PixelRecord { d_hat: f64::NAN, t_hat: None, loss: None, converged: false, reliable: true };
        write_diagnostics(&d, 2, &[rec, undefined]).unwrap();
        assert_eq!(
            fs::read_to_string(&d).unwrap(),
            "row,col,d_hat,T_hat,loss,converged,reliable\n0,0,99.5,286.5,0.25,true,false\n0,1,nan,,,false,true\n"
        );
    }

    #[test]
    fn profiles_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        let profiles = vec![vec![0.9, 0.91], vec![0.3, 0.31], vec![0.5, 0.2], vec![0.1, 0.7]];
        write_profiles_csv(&p, 2, &[8.0, 8.5], &profiles).unwrap();
        let (w, wl, back) = read_profiles_csv(&p).unwrap();
        assert_eq!((w, wl, back), (2, vec![8.0, 8.5], profiles));
    }
}
