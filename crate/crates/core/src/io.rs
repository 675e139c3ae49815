//! `TFD1` field files and `LFD1` line-function files.
//!
//! A `TFD1` record is the ASCII line `TFD1 d N realflag` followed by
//! `(2N+1)^d` little-endian `f64` pairs `(re, im)`. Vector fields are `d`
//! consecutive records. An `LFD1` file is the line `LFD1 T h count TFD1`
//! followed by `count · components` records, sample by sample.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::strip::LineFunction;
use crate::torus::{Shape, SpaceNorm, TorusField, VectorField};

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_field<W: Write>(w: &mut W, f: &TorusField) -> Result<()> {
    let s = f.shape();
    writeln!(w, "TFD1 {} {} {}", s.dim, s.bandlimit, f.is_real() as u8).map_err(io_err)?;
    let mut buf = Vec::with_capacity(16 * s.len());
    for z in f.coeffs() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

/// Reader that tracks the byte offset for diagnostics.
struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> Cursor<R> {
    fn header(&mut self) -> Result<Option<(u64, Vec<String>)>> {
        let start = self.offset;
        let mut line = String::new();
        let n = self.inner.read_line(&mut line).map_err(io_err)?;
        if n == 0 {
            return Ok(None);
        }
        self.offset += n as u64;
        Ok(Some((start, line.split_whitespace().map(str::to_string).collect())))
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let mut buf = vec![0u8; 8 * count];
        self.inner.read_exact(&mut buf).map_err(|_| {
            Error::Format(format!("truncated coefficient block at byte {}", self.offset))
        })?;
        self.offset += buf.len() as u64;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn field(&mut self) -> Result<Option<TorusField>> {
        let Some((at, tok)) = self.header()? else {
            return Ok(None);
        };
        let bad = |what: &str| Error::Format(format!("{what} in TFD1 header at byte {at}"));
        if tok.len() != 4 || tok[0] != "TFD1" {
            return Err(bad("expected `TFD1 d N realflag`"));
        }
        let d: usize = tok[1].parse().map_err(|_| bad("bad dimension"))?;
        let n: usize = tok[2].parse().map_err(|_| bad("bad bandlimit"))?;
        let real = match tok[3].as_str() {
            "0" => false,
            "1" => true,
            _ => return Err(bad("realflag must be 0 or 1")),
        };
        let shape = Shape::try_new(d, n).map_err(|_| bad("invalid shape"))?;
        let v = self.floats(2 * shape.len())?;
        let coeffs = v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        TorusField::from_coeffs(shape, coeffs, real)
            .map(Some)
            .map_err(|e| Error::Format(format!("record at byte {at}: {e}")))
    }
}

fn cursor<R: Read>(r: R) -> Cursor<std::io::BufReader<R>> {
    Cursor {
        inner: std::io::BufReader::new(r),
        offset: 0,
    }
}

/// All `TFD1` records in a stream.
pub fn read_fields<R: Read>(r: R) -> Result<Vec<TorusField>> {
    let mut c = cursor(r);
    let mut out = Vec::new();
    while let Some(f) = c.field()? {
        out.push(f);
    }
    if out.is_empty() {
        return Err(Error::Format("no TFD1 record".into()));
    }
    Ok(out)
}

pub fn write_vector<W: Write>(w: &mut W, v: &VectorField) -> Result<()> {
    v.components().iter().try_for_each(|f| write_field(w, f))
}

pub fn read_vector<R: Read>(r: R) -> Result<VectorField> {
    let fields = read_fields(r)?;
    VectorField::new(fields).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_line<W: Write>(w: &mut W, g: &LineFunction) -> Result<()> {
    writeln!(w, "LFD1 {} {} {} TFD1", g.half_width(), g.step(), g.count()).map_err(io_err)?;
    for k in 0..g.count() {
        for f in g.sample(k) {
            write_field(w, &f)?;
        }
    }
    Ok(())
}

pub fn read_line<R: Read>(r: R) -> Result<LineFunction> {
    let mut c = cursor(r);
    let (_, tok) = c.header()?.ok_or_else(|| Error::Format("empty LFD1 file".into()))?;
    let bad = |what: &str| Error::Format(format!("{what} in LFD1 header at byte 0"));
    if tok.len() != 5 || tok[0] != "LFD1" || tok[4] != "TFD1" {
        return Err(bad("expected `LFD1 T h count TFD1`"));
    }
    let t: f64 = tok[1].parse().map_err(|_| bad("bad half-width"))?;
    let h: f64 = tok[2].parse().map_err(|_| bad("bad step"))?;
    let count: usize = tok[3].parse().map_err(|_| bad("bad count"))?;
    let mut fields = Vec::new();
    while let Some(f) = c.field()? {
        fields.push(f);
    }
    if count == 0 || fields.is_empty() || fields.len() % count != 0 {
        return Err(Error::Format(format!(
            "{} records do not split into {count} samples",
            fields.len()
        )));
    }
    let comps = fields.len() / count;
    let shape = fields[0].shape();
    let mut g = LineFunction::zeros(t, h, shape, comps, SpaceNorm::Lp(2.0))
        .map_err(|e| Error::Format(e.to_string()))?;
    if g.count() != count {
        return Err(bad("count disagrees with 2T/h + 1"));
    }
    for (k, s) in fields.chunks(comps).enumerate() {
        g.set_sample(k, s).map_err(|e| Error::Format(format!("sample {k}: {e}")))?;
    }
    Ok(g)
}

pub fn load_fields(path: &Path) -> Result<Vec<TorusField>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    read_fields(f).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn load_line(path: &Path) -> Result<LineFunction> {
    let f = std::fs::File::open(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    read_line(f).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn save_fields(path: &Path, fields: &[TorusField]) -> Result<()> {
    let mut buf = Vec::new();
    for f in fields {
        write_field(&mut buf, f)?;
    }
    std::fs::write(path, buf).map_err(io_err)
}

pub fn save_line(path: &Path, g: &LineFunction) -> Result<()> {
    let mut buf = Vec::new();
    write_line(&mut buf, g)?;
    std::fs::write(path, buf).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shape = Shape::new(2, 3);
        let v = VectorField::random(shape, true, &mut rng);
        let mut buf = Vec::new();
        write_vector(&mut buf, &v).unwrap();
        assert!(buf.starts_with(b"TFD1 2 3 1\n"));
        assert_eq!(read_vector(&buf[..]).unwrap(), v);
    }

    #[test]
    fn line_round_trip() {
        let shape = Shape::new(1, 2);
        let g = LineFunction::from_fn(1.0, 0.25, shape, 2, SpaceNorm::Lp(2.0), |t| {
            vec![TorusField::constant(shape, t), TorusField::constant(shape, -t * t)]
        })
        .unwrap();
        let mut buf = Vec::new();
        write_line(&mut buf, &g).unwrap();
        let back = read_line(&buf[..]).unwrap();
        assert_eq!(back.data(), g.data());
        assert_eq!(back.components(), 2);
    }

    #[test]
    fn malformed_input_reports_location() {
        let e = read_fields(&b"TFD1 1 2 1\n\0\0"[..]).unwrap_err();
        assert!(e.to_string().contains("byte 11"), "{e}");
        let e = read_fields(&b"TFX 1 2 1\n"[..]).unwrap_err();
        assert!(e.to_string().contains("byte 0"));
    }
}
