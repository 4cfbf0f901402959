//! Binary snapshots: a fixed header followed by little-endian `f64` arrays.
//!
//! Layout: `"MHBL"`, version `u32`, `nx u32`, `n u32`, `t f64`, tag `u8`
//! (0 transformed, 1 physical), then the fields in fixed order, second index fastest.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{Field, State};
use crate::transform::PhysicalState;

pub const MAGIC: &[u8; 4] = b"MHBL";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Transformed(State<f64>),
    Physical(PhysicalState<f64>),
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        match self {
            Snapshot::Transformed(s) => s.time,
            Snapshot::Physical(p) => p.time,
        }
    }

    pub fn tag(&self) -> u8 {
        match self {
            Snapshot::Transformed(_) => 0,
            Snapshot::Physical(_) => 1,
        }
    }

    pub fn fields(&self) -> Vec<(&'static str, &Field<f64>)> {
        match self {
            Snapshot::Transformed(s) => vec![("u1", &s.u1), ("theta", &s.theta), ("q", &s.q)],
            Snapshot::Physical(p) => p.fields().to_vec(),
        }
    }

    /// `(nx, n)` of every field.
    pub fn shape(&self) -> (usize, usize) {
        let f = self.fields()[0].1;
        (f.nx, f.n)
    }
}

pub fn encode(snap: &Snapshot) -> Vec<u8> {
    let (nx, n) = snap.shape();
    let fields = snap.fields();
    let mut buf = Vec::with_capacity(HEADER_LEN + fields.len() * nx * n * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(nx as u32).to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&snap.time().to_le_bytes());
    buf.push(snap.tag());
    for (_, f) in fields {
        for x in &f.data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(Error::Format {
                offset: self.bytes.len(),
                message: format!("truncated while reading {what}"),
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn field(&mut self, nx: usize, n: usize, what: &str) -> Result<Field<f64>> {
        let raw = self.take(nx * n * 8, what)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Field { nx, n, data })
    }
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "magic")? != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad magic (not an MHBL snapshot)".into(),
        });
    }
    let version = c.u32("version")?;
    if version != VERSION {
        return Err(Error::Version {
            found: version,
            expected: VERSION,
        });
    }
    let nx = c.u32("nx")? as usize;
    let n = c.u32("n")? as usize;
    let time = c.f64("time")?;
    let tag_at = c.pos;
    let tag = c.take(1, "tag")?[0];
    let snap = match tag {
        0 => Snapshot::Transformed(State {
            u1: c.field(nx, n, "u1")?,
            theta: c.field(nx, n, "theta")?,
            q: c.field(nx, n, "q")?,
            time,
        }),
        1 => Snapshot::Physical(PhysicalState {
            rho: c.field(nx, n, "rho")?,
            u1: c.field(nx, n, "u1")?,
            u2: c.field(nx, n, "u2")?,
            theta: c.field(nx, n, "theta")?,
            h1: c.field(nx, n, "h1")?,
            h2: c.field(nx, n, "h2")?,
            time,
        }),
        t => {
            return Err(Error::Format {
                offset: tag_at,
                message: format!("unknown field-set tag {t}"),
            })
        }
    };
    if c.pos != bytes.len() {
        return Err(Error::Format {
            offset: c.pos,
            message: format!("{} trailing bytes", bytes.len() - c.pos),
        });
    }
    Ok(snap)
}

pub fn write_snapshot(snap: &Snapshot, path: &Path) -> Result<()> {
    std::fs::write(path, encode(snap))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let f = |k: f64| Field::from_fn(3, 4, |i, j| k + i as f64 * 0.1 - j as f64 / 3.0);
        Snapshot::Transformed(State {
            u1: f(1.0),
            theta: f(2.0),
            q: f(3.0),
            time: 0.125,
        })
    }

    #[test]
    fn header_layout() {
        let b = encode(&sample());
        assert_eq!(&b[..4], b"MHBL");
        assert_eq!(b.len(), HEADER_LEN + 3 * 12 * 8);
        assert_eq!(b[HEADER_LEN - 1], 0);
    }

    #[test]
    fn truncation_reports_offset() {
        let b = encode(&sample());
        let err = decode(&b[..b.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Format { offset, .. } if offset == b.len() - 3));
    }

    #[test]
    fn old_version_rejected() {
        let mut b = encode(&sample());
        b[4..8].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(decode(&b), Err(Error::Version { found: 0, expected: 1 })));
    }
}
