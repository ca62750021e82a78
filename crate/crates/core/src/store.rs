//! Canonical binary dataset store.
//!
//! Layout (little endian): magic `SIMSUB\0\x01`, trajectory count `u64`, then per
//! trajectory: id length `u32`, UTF-8 id, point count `u64`, and per point
//! `x: f64`, `y: f64`, flag `u8` (1 when a timestamp follows), optional `t: f64`.
//! Provenance is not stored, so equal datasets always produce equal bytes.

use std::path::Path;

use crate::error::{Error, Result};
use crate::trajectory::{Dataset, Point, Trajectory};

pub const MAGIC: &[u8; 8] = b"SIMSUB\0\x01";

pub fn encode(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(ds.len() as u64).to_le_bytes());
    for t in ds.iter() {
        out.extend_from_slice(&(t.id.len() as u32).to_le_bytes());
        out.extend_from_slice(t.id.as_bytes());
        out.extend_from_slice(&(t.len() as u64).to_le_bytes());
        for p in t.points() {
            out.extend_from_slice(&p.x.to_le_bytes());
            out.extend_from_slice(&p.y.to_le_bytes());
            match p.t {
                Some(ts) => {
                    out.push(1);
                    out.extend_from_slice(&ts.to_le_bytes());
                }
                None => out.push(0),
            }
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format(format!("store truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8).ok() != Some(MAGIC.as_slice()) {
        return Err(Error::Format("not a simsub store (bad magic)".into()));
    }
    let count = r.u64()?;
    let mut trajectories = Vec::new();
    for _ in 0..count {
        let len = r.u32()? as usize;
        let id = std::str::from_utf8(r.take(len)?)
            .map_err(|e| Error::Format(format!("store id is not UTF-8: {e}")))?
            .to_string();
        let n = r.u64()?;
        let mut points = Vec::new();
        for _ in 0..n {
            let (x, y) = (r.f64()?, r.f64()?);
            points.push(match r.u8()? {
                0 => Point::new(x, y),
                1 => Point::with_time(x, y, r.f64()?),
                f => return Err(Error::Format(format!("bad timestamp flag {f}"))),
            });
        }
        trajectories.push(Trajectory::new(id, points)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes in store", bytes.len() - r.pos)));
    }
    Dataset::from_trajectories(trajectories)
}

pub fn write_store(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(ds)).map_err(|e| Error::io(path, e))
}

pub fn read_store(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut ds = decode(&bytes)?;
    ds.provenance.source = path.to_path_buf();
    ds.provenance.rows_read = ds.iter().map(|t| t.len() as u64).sum();
    Ok(ds)
}
