//! Plain-text and binary containers for [`FormField`] and [`Grid4`].
//!
//! Text form container:
//!
//! ```text
//! hermitian4-form 1
//! degree <k>
//! n <n>
//! orientation <+1|-1>
//! values <count>
//! <one value per line, cell index order>
//! ```
//!
//! Text grid container: header `hermitian4-grid 1`, then `n`, `orientation`
//! and `vertices <count>` lines, then one line per vertex with the ten
//! entries `g00 g01 g02 g03 g11 g12 g13 g22 g23 g33`.
//!
//! Binary containers use little-endian numbers throughout. A form is the
//! magic `H4FORM01`, `u32` degree, `u32` n, `i32` orientation, `u64` count
//! and `count` `f64` values. A grid is the magic `H4GRID01`, `u32` n, `i32`
//! orientation, `u64` vertex count and ten `f64` per vertex.

use std::io::{Read, Write};

use super::{FormField, Grid4, HodgeError};
use crate::pointwise::{Mat4, Metric4, Orientation};

const FORM_MAGIC: &[u8; 8] = b"H4FORM01";
const GRID_MAGIC: &[u8; 8] = b"H4GRID01";

fn sign_str(o: Orientation) -> &'static str {
    match o {
        Orientation::Positive => "+1",
        Orientation::Negative => "-1",
    }
}

fn parse_sign(s: &str) -> Result<Orientation, HodgeError> {
    match s {
        "+1" | "1" => Ok(Orientation::Positive),
        "-1" => Ok(Orientation::Negative),
        _ => Err(HodgeError::Format(format!("bad orientation {s:?}"))),
    }
}

fn upper(g: &Metric4) -> [f64; 10] {
    let m = g.matrix();
    let mut out = [0.0; 10];
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            out[k] = m[(i, j)];
            k += 1;
        }
    }
    out
}

fn from_upper(e: &[f64]) -> Metric4 {
    let mut m = Mat4::zeros();
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            m[(i, j)] = e[k];
            m[(j, i)] = e[k];
            k += 1;
        }
    }
    Metric4::new_unchecked(m)
}

pub fn write_form_text(w: &mut impl Write, f: &FormField, orientation: Orientation) -> Result<(), HodgeError> {
    writeln!(w, "hermitian4-form 1")?;
    writeln!(w, "degree {}", f.degree())?;
    writeln!(w, "n {}", f.n())?;
    writeln!(w, "orientation {}", sign_str(orientation))?;
    writeln!(w, "values {}", f.len())?;
    for x in f.values() {
        writeln!(w, "{x:?}")?;
    }
    Ok(())
}

pub fn write_form_binary(w: &mut impl Write, f: &FormField, orientation: Orientation) -> Result<(), HodgeError> {
    w.write_all(FORM_MAGIC)?;
    w.write_all(&(f.degree() as u32).to_le_bytes())?;
    w.write_all(&(f.n() as u32).to_le_bytes())?;
    w.write_all(&(orientation.sign() as i32).to_le_bytes())?;
    w.write_all(&(f.len() as u64).to_le_bytes())?;
    for x in f.values() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_grid_text(w: &mut impl Write, grid: &Grid4) -> Result<(), HodgeError> {
    writeln!(w, "hermitian4-grid 1")?;
    writeln!(w, "n {}", grid.n())?;
    writeln!(w, "orientation {}", sign_str(grid.orientation()))?;
    writeln!(w, "vertices {}", grid.num_vertices())?;
    for g in grid.metrics() {
        let e = upper(g).map(|x| format!("{x:?}"));
        writeln!(w, "{}", e.join(" "))?;
    }
    Ok(())
}

pub fn write_grid_binary(w: &mut impl Write, grid: &Grid4) -> Result<(), HodgeError> {
    w.write_all(GRID_MAGIC)?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&(grid.orientation().sign() as i32).to_le_bytes())?;
    w.write_all(&(grid.num_vertices() as u64).to_le_bytes())?;
    for g in grid.metrics() {
        for x in upper(g) {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], HodgeError> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| HodgeError::Format("truncated binary container".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, HodgeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn i32(&mut self) -> Result<i32, HodgeError> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, HodgeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>, HodgeError> {
        let raw = self.take(count.checked_mul(8).ok_or_else(|| HodgeError::Format("count overflow".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }

    fn finish(&self) -> Result<(), HodgeError> {
        if self.pos != self.bytes.len() {
            return Err(HodgeError::Format("trailing bytes".into()));
        }
        Ok(())
    }
}

fn binary_sign(s: i32) -> Result<Orientation, HodgeError> {
    match s {
        1 => Ok(Orientation::Positive),
        -1 => Ok(Orientation::Negative),
        _ => Err(HodgeError::Format(format!("bad orientation {s}"))),
    }
}

struct TextHeader<'a> {
    lines: std::str::Lines<'a>,
}

impl<'a> TextHeader<'a> {
    fn field(&mut self, key: &str) -> Result<&'a str, HodgeError> {
        let line = self.lines.next().ok_or_else(|| HodgeError::Format(format!("missing {key} line")))?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(HodgeError::Format(format!("expected {key}, found {line:?}"))),
        }
    }

    fn number(&mut self, key: &str) -> Result<usize, HodgeError> {
        let v = self.field(key)?;
        v.parse().map_err(|_| HodgeError::Format(format!("bad {key} {v:?}")))
    }
}

fn parse_f64(s: &str) -> Result<f64, HodgeError> {
    s.parse().map_err(|_| HodgeError::Format(format!("bad number {s:?}")))
}

/// Reads either form container, detected by the leading bytes.
pub fn read_form(r: &mut impl Read) -> Result<(FormField, Orientation), HodgeError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.starts_with(FORM_MAGIC) {
        let mut c = Cursor { bytes: &bytes, pos: 8 };
        let degree = c.u32()? as usize;
        let n = c.u32()? as usize;
        let orientation = binary_sign(c.i32()?)?;
        let count = c.u64()? as usize;
        let values = c.f64s(count)?;
        c.finish()?;
        return Ok((FormField::from_values(degree, n, values)?, orientation));
    }
    let text = std::str::from_utf8(&bytes).map_err(|_| HodgeError::Format("not UTF-8 text".into()))?;
    let mut h = TextHeader { lines: text.lines() };
    if h.field("hermitian4-form")? != "1" {
        return Err(HodgeError::Format("unsupported form container version".into()));
    }
    let degree = h.number("degree")?;
    let n = h.number("n")?;
    let orientation = parse_sign(h.field("orientation")?)?;
    let count = h.number("values")?;
    let values: Vec<f64> = h.lines.by_ref().filter(|l| !l.trim().is_empty()).map(|l| parse_f64(l.trim())).collect::<Result<_, _>>()?;
    if values.len() != count {
        return Err(HodgeError::BadLength { expected: count, got: values.len() });
    }
    Ok((FormField::from_values(degree, n, values)?, orientation))
}

/// Reads either grid container, detected by the leading bytes.
pub fn read_grid(r: &mut impl Read) -> Result<Grid4, HodgeError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let (n, orientation, entries) = if bytes.starts_with(GRID_MAGIC) {
        let mut c = Cursor { bytes: &bytes, pos: 8 };
        let n = c.u32()? as usize;
        let orientation = binary_sign(c.i32()?)?;
        let count = c.u64()? as usize;
        let entries = c.f64s(count.checked_mul(10).ok_or_else(|| HodgeError::Format("count overflow".into()))?)?;
        c.finish()?;
        (n, orientation, entries)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| HodgeError::Format("not UTF-8 text".into()))?;
        let mut h = TextHeader { lines: text.lines() };
        if h.field("hermitian4-grid")? != "1" {
            return Err(HodgeError::Format("unsupported grid container version".into()));
        }
        let n = h.number("n")?;
        let orientation = parse_sign(h.field("orientation")?)?;
        let count = h.number("vertices")?;
        let mut entries = Vec::with_capacity(10 * count);
        for line in h.lines.by_ref().filter(|l| !l.trim().is_empty()) {
            let row: Vec<f64> = line.split_whitespace().map(parse_f64).collect::<Result<_, _>>()?;
            if row.len() != 10 {
                return Err(HodgeError::Format(format!("expected 10 metric entries, found {}", row.len())));
            }
            entries.extend(row);
        }
        if entries.len() != 10 * count {
            return Err(HodgeError::BadLength { expected: count, got: entries.len() / 10 });
        }
        (n, orientation, entries)
    };
    let metrics = entries.chunks_exact(10).map(from_upper).collect();
    Grid4::new(n, metrics, orientation)
}
