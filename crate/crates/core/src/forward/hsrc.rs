//! "HSRC" v1 cube files.
//!
//! ```text
//! HSRC 1\n
//! <H> <W> <K> <t_air>\n
//! <lambda_0> <lambda_1> ... <lambda_K-1>\n
//! H*W*K little-endian f32, band-sequential (band 0 row-major, then band 1, ...)
//! ```

use std::fs;
use std::path::Path;

use super::HyperCube;
use crate::error::{Error, Result};
use crate::spectral::SpectralGrid;

pub const MAGIC: &str = "HSRC 1";

pub fn encode(cube: &HyperCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 24 * cube.channels() + 4 * cube.data().len());
    out.extend_from_slice(MAGIC.as_bytes());
    out.push(b'\n');
    out.extend_from_slice(
        format!(
            "{} {} {} {}\n",
            cube.height(),
            cube.width(),
            cube.channels(),
            cube.t_air()
        )
        .as_bytes(),
    );
    let wl: Vec<String> = cube.grid().wavelengths().iter().map(|w| w.to_string()).collect();
    out.extend_from_slice(wl.join(" ").as_bytes());
    out.push(b'\n');
    let k = cube.channels();
    let n = cube.pixel_count();
    for band in 0..k {
        for px in 0..n {
            out.extend_from_slice(&(cube.data()[px * k + band] as f32).to_le_bytes());
        }
    }
    out
}

pub fn write(path: &Path, cube: &HyperCube) -> Result<()> {
    fs::write(path, encode(cube)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<HyperCube> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(path, &bytes)
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, offset: usize, reason: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            reason: reason.into(),
        }
    }

    /// Next LF-terminated ASCII line; returns (start offset, text).
    fn line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let rest = &self.bytes[start..];
        let Some(len) = rest.iter().position(|&b| b == b'\n') else {
            return Err(self.err(start, format!("unterminated {what} line")));
        };
        let text = std::str::from_utf8(&rest[..len])
            .map_err(|_| self.err(start, format!("{what} line is not ASCII")))?;
        self.pos = start + len + 1;
        Ok((start, text))
    }
}

pub fn decode(path: &Path, bytes: &[u8]) -> Result<HyperCube> {
    let mut cur = Cursor { path, bytes, pos: 0 };
    let (at, magic) = cur.line("magic")?;
    if magic != MAGIC {
        return Err(cur.err(at, format!("bad magic `{magic}`, expected `{MAGIC}`")));
    }
    let (at, header) = cur.line("header")?;
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.len() != 4 {
        return Err(cur.err(at, format!("header needs `H W K t_air`, found `{header}`")));
    }
    let dim = |s: &str, name: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| cur.err(at, format!("bad {name} `{s}`")))
    };
    let (h, w, k) = (dim(fields[0], "H")?, dim(fields[1], "W")?, dim(fields[2], "K")?);
    let t_air: f64 = fields[3]
        .parse()
        .map_err(|_| cur.err(at, format!("bad t_air `{}`", fields[3])))?;

    let (at, wl_line) = cur.line("wavelength")?;
    let wavelengths = wl_line
        .split_ascii_whitespace()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| cur.err(at, "unparseable wavelength"))?;
    if wavelengths.len() != k {
        return Err(cur.err(at, format!("{} wavelengths for K = {k}", wavelengths.len())));
    }
    let grid = SpectralGrid::new(wavelengths).map_err(|e| cur.err(at, e.to_string()))?;

    let data_start = cur.pos;
    let n = h
        .checked_mul(w)
        .and_then(|v| v.checked_mul(k))
        .ok_or_else(|| cur.err(data_start, "dimensions overflow"))?;
    let payload = &bytes[data_start..];
    if payload.len() != 4 * n {
        return Err(cur.err(
            data_start + payload.len().min(4 * n),
            format!("payload is {} bytes, expected {}", payload.len(), 4 * n),
        ));
    }
    let npx = h * w;
    let mut data = vec![0.0; n];
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(cur.err(data_start + 4 * i, "non-finite sample"));
        }
        let (band, px) = (i / npx, i % npx);
        data[px * k + band] = v as f64;
    }
    HyperCube::new(h, w, grid, data, t_air, path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> HyperCube {
        let grid = SpectralGrid::uniform(8.0, 13.2, 5).unwrap();
        let data: Vec<f64> = (0..2 * 3 * 5).map(|i| 700.0 + i as f64 * 1.25).collect();
        HyperCube::new(2, 3, grid, data, 289.7, "t").unwrap()
    }

    #[test]
    fn layout_is_band_sequential() {
        let c = cube();
        let bytes = encode(&c);
        let header = "HSRC 1\n2 3 5 289.7\n8 9.3 10.6 11.899999999999999 13.2\n";
        assert_eq!(&bytes[..header.len()], header.as_bytes());
        let payload = &bytes[header.len()..];
        assert_eq!(payload.len(), 2 * 3 * 5 * 4);
        // second sample in the file is band 0 of pixel (0, 1)
        let v = f32::from_le_bytes(payload[4..8].try_into().unwrap());
        assert_eq!(v as f64, c.pixel(0, 1)[0]);
        // sample 6 is band 1 of pixel (0, 0)
        let v = f32::from_le_bytes(payload[24..28].try_into().unwrap());
        assert_eq!(v as f64, c.pixel(0, 0)[1]);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = cube();
        let bytes = encode(&c);
        let back = decode(Path::new("mem"), &bytes).unwrap();
        assert_eq!(encode(&back), bytes);
        assert_eq!(back.data(), c.data());
        assert_eq!(back.grid(), c.grid());
        assert_eq!(back.t_air(), 289.7);
    }

    #[test]
    fn corrupt_inputs_report_offsets() {
        let good = encode(&cube());
        let p = Path::new("mem");
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(p, &bad), Err(Error::Format { offset: 0, .. })));

        let truncated = &good[..good.len() - 3];
        let header_len = good.len() - 120;
        match decode(p, truncated).unwrap_err() {
            Error::Format { offset, .. } => assert_eq!(offset as usize, header_len + 117),
            e => panic!("{e}"),
        }

        let mut long = good.clone();
        long.push(0);
        assert!(matches!(decode(p, &long), Err(Error::Format { .. })));

        let text = b"HSRC 1\n2 3 x 289.7\n";
        assert!(matches!(decode(p, text), Err(Error::Format { offset: 7, .. })));
        let text = b"HSRC 1\n1 1 2 289.7\n8.0\n";
        assert!(matches!(decode(p, text), Err(Error::Format { offset: 19, .. })));
    }
}
