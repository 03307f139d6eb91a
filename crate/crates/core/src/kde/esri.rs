//! ESRI ASCII grid and flat binary raster encodings.
//!
//! Both encodings store rows north first. The binary sidecar is little-endian:
//!
//! | offset | type    | field                    |
//! |--------|---------|--------------------------|
//! | 0      | [u8; 4] | magic `PSRB`             |
//! | 4      | u32     | version (1)              |
//! | 8      | u32     | ncols                    |
//! | 12     | u32     | nrows                    |
//! | 16     | f64     | xllcorner                |
//! | 24     | f64     | yllcorner                |
//! | 32     | f64     | cellsize                 |
//! | 40     | f64 × n | values                   |

use std::fmt::Write as _;

use super::raster::{GridGeometry, Raster};
use crate::error::{Error, Result};

pub const NODATA: f64 = -9999.0;
const MAGIC: &[u8; 4] = b"PSRB";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 40;

/// Formats like C's `%.{sig}g`.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_ascii_grid(raster: &Raster) -> String {
    let g = raster.geometry();
    let mut out = String::with_capacity(g.len() * 12 + 128);
    let _ = writeln!(out, "ncols {}", g.n_cols);
    let _ = writeln!(out, "nrows {}", g.n_rows);
    let _ = writeln!(out, "xllcorner {}", format_sig(g.origin_x, 15));
    let _ = writeln!(out, "yllcorner {}", format_sig(g.origin_y, 15));
    let _ = writeln!(out, "cellsize {}", format_sig(g.cell_size, 15));
    let _ = writeln!(out, "NODATA_value {}", format_sig(NODATA, 9));
    for row in (0..g.n_rows).rev() {
        for col in 0..g.n_cols {
            if col > 0 {
                out.push(' ');
            }
            out.push_str(&format_sig(raster.get(col, row), 9));
        }
        out.push('\n');
    }
    out
}

/// Reads an ESRI ASCII grid. NODATA cells become 0.
pub fn read_ascii_grid(text: &str) -> Result<Raster> {
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut center_registered = false;
    let mut cellsize = None;
    let mut nodata = None;

    let mut tokens = text.split_whitespace().peekable();
    while let Some(key) = tokens.peek() {
        if key.parse::<f64>().is_ok() {
            break;
        }
        let key = tokens.next().unwrap().to_ascii_lowercase();
        let value = tokens
            .next()
            .ok_or_else(|| Error::RasterFormat(format!("header key `{key}` has no value")))?;
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::RasterFormat(format!("`{key}` value `{v}` is not a number")))
        };
        match key.as_str() {
            "ncols" => ncols = Some(num(value)? as usize),
            "nrows" => nrows = Some(num(value)? as usize),
            "xllcorner" => xll = Some(num(value)?),
            "yllcorner" => yll = Some(num(value)?),
            "xllcenter" => {
                xll = Some(num(value)?);
                center_registered = true;
            }
            "yllcenter" => {
                yll = Some(num(value)?);
                center_registered = true;
            }
            "cellsize" => cellsize = Some(num(value)?),
            "nodata_value" => nodata = Some(num(value)?),
            other => return Err(Error::RasterFormat(format!("unknown header key `{other}`"))),
        }
    }

    let missing = |k: &str| Error::RasterFormat(format!("missing `{k}`"));
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
    let mut xll = xll.ok_or_else(|| missing("xllcorner"))?;
    let mut yll = yll.ok_or_else(|| missing("yllcorner"))?;
    if center_registered {
        xll -= cellsize / 2.0;
        yll -= cellsize / 2.0;
    }
    let geometry = GridGeometry::new(xll, yll, cellsize, ncols, nrows)?;

    let mut values = vec![0.0; geometry.len()];
    let mut count = 0;
    for tok in tokens {
        if count >= geometry.len() {
            return Err(Error::RasterFormat("more values than ncols * nrows".into()));
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::RasterFormat(format!("value `{tok}` is not a number")))?;
        let row_from_top = count / ncols;
        let col = count % ncols;
        let row = nrows - 1 - row_from_top;
        values[geometry.index(col, row)] = if Some(v) == nodata { 0.0 } else { v };
        count += 1;
    }
    if count != geometry.len() {
        return Err(Error::RasterFormat(format!(
            "expected {} values, found {count}",
            geometry.len()
        )));
    }
    Raster::from_values(geometry, values)
}

pub fn write_binary(raster: &Raster) -> Vec<u8> {
    let g = raster.geometry();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n_cols as u32).to_le_bytes());
    out.extend_from_slice(&(g.n_rows as u32).to_le_bytes());
    out.extend_from_slice(&g.origin_x.to_le_bytes());
    out.extend_from_slice(&g.origin_y.to_le_bytes());
    out.extend_from_slice(&g.cell_size.to_le_bytes());
    for row in (0..g.n_rows).rev() {
        for col in 0..g.n_cols {
            out.extend_from_slice(&raster.get(col, row).to_le_bytes());
        }
    }
    out
}

pub fn read_binary(bytes: &[u8]) -> Result<Raster> {
    if bytes.len() < HEADER_LEN || &bytes[0..4] != MAGIC {
        return Err(Error::RasterFormat("not a placescope binary raster".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::RasterFormat(format!(
            "unsupported version {version}"
        )));
    }
    let geometry = GridGeometry::new(
        f64_at(16),
        f64_at(24),
        f64_at(32),
        u32_at(8) as usize,
        u32_at(12) as usize,
    )?;
    if bytes.len() != HEADER_LEN + 8 * geometry.len() {
        return Err(Error::RasterFormat(format!(
            "payload is {} bytes, expected {}",
            bytes.len() - HEADER_LEN,
            8 * geometry.len()
        )));
    }
    let mut values = vec![0.0; geometry.len()];
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let row = geometry.n_rows - 1 - k / geometry.n_cols;
        let col = k % geometry.n_cols;
        values[geometry.index(col, row)] = f64::from_le_bytes(chunk.try_into().unwrap());
    }
    Raster::from_values(geometry, values)
}
