//! Plain-text field files.
//!
//! ```text
//! # radial-field v1 r_max=<r_max> n=<n>
//! r value_re [value_im]
//! ```
//!
//! Numbers use the shortest round-trip decimal form, so a write/read cycle
//! reproduces every sample bit for bit. The grid kind is recovered from the
//! node positions.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::RadialField;
use super::grid::{make_grid, GridKind};
use crate::error::{Error, Result};

const MAGIC: &str = "# radial-field v1";

pub fn write_field<W: Write>(mut w: W, u: &RadialField) -> Result<()> {
    let grid = u.grid();
    writeln!(w, "{MAGIC} r_max={} n={}", grid.r_max(), grid.len())?;
    let real = u.values().iter().all(|z| z.im == 0.0);
    for (r, z) in grid.nodes().iter().zip(u.values()) {
        if real {
            writeln!(w, "{r} {}", z.re)?;
        } else {
            writeln!(w, "{r} {} {}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn save_field(path: impl AsRef<Path>, u: &RadialField) -> Result<()> {
    let mut buf = Vec::new();
    write_field(&mut buf, u)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_field<R: Read>(r: R) -> Result<RadialField> {
    let mut lines = BufReader::new(r).lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))??;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
    let mut r_max = None;
    let mut n = None;
    for tok in rest.split_whitespace() {
        match tok.split_once('=') {
            Some(("r_max", v)) => r_max = v.parse::<f64>().ok(),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(Error::Parse(format!("unknown header token `{tok}`"))),
        }
    }
    let (r_max, n) = match (r_max, n) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Parse("header needs r_max and n".into())),
    };
    let mut nodes = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        match cols.as_slice() {
            [r, re] => {
                nodes.push(*r);
                values.push(Complex64::new(*re, 0.0));
            }
            [r, re, im] => {
                nodes.push(*r);
                values.push(Complex64::new(*re, *im));
            }
            _ => return Err(Error::Parse(format!("line {}: expected 2 or 3 columns", lineno + 2))),
        }
    }
    if nodes.len() != n {
        return Err(Error::Parse(format!("header says n={n}, found {} rows", nodes.len())));
    }
    let kind = infer_kind(&nodes, r_max)?;
    RadialField::new(make_grid(r_max, n, kind)?, values)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<RadialField> {
    read_field(fs::File::open(path)?)
}

fn infer_kind(nodes: &[f64], r_max: f64) -> Result<GridKind> {
    let n = nodes.len();
    let h = r_max / n as f64;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(h);
    if nodes.iter().enumerate().all(|(j, &r)| close(r, (j as f64 + 0.5) * h)) {
        return Ok(GridKind::Uniform);
    }
    if n >= 16 {
        let g = make_grid(r_max, n, GridKind::GaussBessel)?;
        if nodes.iter().zip(g.nodes()).all(|(&a, &b)| close(a, b)) {
            return Ok(GridKind::GaussBessel);
        }
    }
    Err(Error::Parse("node positions match neither uniform nor gauss-bessel layout".into()))
}
