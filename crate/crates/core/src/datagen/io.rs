//! Trajectory container.
//!
//! ```text
//! offset  size  content
//! 0       8     magic b"OPSTRAJ\n"
//! 8       8     header length H, u64 little-endian
//! 16      H     UTF-8 JSON header, last byte '\n'
//! 16+H    P     payload: f64 little-endian, frame-major, then channel, then row-major space
//! 16+H+P  8     FNV-1a 64 hash of the payload bytes, u64 little-endian
//! ```
//!
//! The header records `magic`, `version`, `grid`, `channels`, `frames`, `dt`,
//! `mu`, `seed`, `generator`, `solver`, `dtype` (`"f64"`), `byte_order`
//! (`"little"`) and `payload_bytes`. Files are written to a temporary file in
//! the target directory and renamed into place.

use std::collections::BTreeMap;
use std::fs::File;
use std::hash::Hasher;
use std::io::{Read, Write};
use std::path::Path;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, FormatError, Result};
use crate::field::{Field, Grid};
use crate::physics::Coefficients;

pub const MAGIC: &[u8; 8] = b"OPSTRAJ\n";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub magic: String,
    pub version: u32,
    pub grid: Grid,
    pub channels: usize,
    pub frames: usize,
    pub dt: f64,
    pub mu: Coefficients,
    pub seed: u64,
    pub generator: String,
    pub solver: BTreeMap<String, serde_json::Value>,
    pub dtype: String,
    pub byte_order: String,
    pub payload_bytes: u64,
}

impl TrajectoryHeader {
    fn of(t: &Trajectory) -> Self {
        TrajectoryHeader {
            magic: "OPSTRAJ".into(),
            version: FORMAT_VERSION,
            grid: *t.grid(),
            channels: t.channels(),
            frames: t.len(),
            dt: t.dt(),
            mu: t.mu.clone(),
            seed: t.seed,
            generator: t.generator.clone(),
            solver: t.solver.clone(),
            dtype: "f64".into(),
            byte_order: "little".into(),
            payload_bytes: (t.len() * t.channels() * t.grid().len() * 8) as u64,
        }
    }

    fn validate(&self) -> Result<(), FormatError> {
        let bad = |m: String| Err(FormatError::CorruptHeader(m));
        if self.magic != "OPSTRAJ" {
            return bad(format!("magic field `{}`", self.magic));
        }
        if self.version != FORMAT_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.dtype != "f64" || self.byte_order != "little" {
            return bad(format!("unsupported element type {} / {}", self.dtype, self.byte_order));
        }
        let expected = (self.frames as u64)
            .checked_mul(self.channels as u64)
            .and_then(|v| v.checked_mul(self.grid.len() as u64))
            .and_then(|v| v.checked_mul(8));
        if expected != Some(self.payload_bytes) {
            return bad(format!("payload_bytes {} does not match the declared shape", self.payload_bytes));
        }
        if self.frames < 2 || !(self.channels == 1 || self.channels == 2) {
            return bad(format!("{} frames of {} channels", self.frames, self.channels));
        }
        Ok(())
    }
}

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Serialize to the container layout.
pub fn encode_trajectory(t: &Trajectory) -> Vec<u8> {
    let header = TrajectoryHeader::of(t);
    let mut json = serde_json::to_vec(&header).expect("header serializes");
    json.push(b'\n');
    let mut payload = Vec::with_capacity(header.payload_bytes as usize);
    for f in t.frames() {
        for v in f.values() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(24 + json.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&checksum(&payload).to_le_bytes());
    out
}

fn truncated(expected: u64, found: usize) -> Error {
    FormatError::Truncated { expected, found: found as u64 }.into()
}

fn parse_header(bytes: &[u8]) -> Result<(TrajectoryHeader, usize)> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(FormatError::BadMagic.into());
    }
    if bytes.len() < 16 {
        return Err(truncated(16, bytes.len()));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let end = 16u64.checked_add(len).ok_or_else(|| FormatError::CorruptHeader("header length overflows".into()))?;
    if (bytes.len() as u64) < end {
        return Err(truncated(end, bytes.len()));
    }
    let end = end as usize;
    let text = &bytes[16..end];
    if text.last() != Some(&b'\n') {
        return Err(FormatError::CorruptHeader("header does not end with a newline".into()).into());
    }
    let header: TrajectoryHeader =
        serde_json::from_slice(text).map_err(|e| FormatError::CorruptHeader(e.to_string()))?;
    header.validate()?;
    Ok((header, end))
}

/// Decode a container produced by [`encode_trajectory`].
pub fn decode_trajectory(bytes: &[u8]) -> Result<Trajectory> {
    let (h, start) = parse_header(bytes)?;
    let expected = start as u64 + h.payload_bytes + 8;
    if (bytes.len() as u64) < expected {
        return Err(truncated(expected, bytes.len()));
    }
    if (bytes.len() as u64) > expected {
        return Err(FormatError::CorruptHeader(format!("{} trailing bytes", bytes.len() as u64 - expected)).into());
    }
    let payload = &bytes[start..start + h.payload_bytes as usize];
    let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().expect("8 bytes"));
    let computed = checksum(payload);
    if stored != computed {
        return Err(FormatError::ChecksumMismatch { stored, computed }.into());
    }
    let per_frame = h.channels * h.grid.len();
    let values: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let frames = values
        .chunks_exact(per_frame)
        .map(|c| Field::new(h.grid, h.channels, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Trajectory::new(frames, h.dt)?.with_metadata(h.mu, h.seed, h.generator);
    t.solver = h.solver;
    Ok(t)
}

/// Atomically write `t` to `path`.
pub fn write_trajectory(path: impl AsRef<Path>, t: &Trajectory) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(&encode_trajectory(t)).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_trajectory(&bytes)
}

/// Read only the header, leaving the payload on disk.
pub fn read_header(path: impl AsRef<Path>) -> Result<TrajectoryHeader> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut prefix = [0u8; 16];
    let got = read_up_to(&mut file, &mut prefix).map_err(|e| Error::io(path, e))?;
    if got < 8 || &prefix[..8] != MAGIC {
        return Err(FormatError::BadMagic.into());
    }
    if got < 16 {
        return Err(truncated(16, got));
    }
    let len = u64::from_le_bytes(prefix[8..16].try_into().expect("8 bytes"));
    let size = file.metadata().map_err(|e| Error::io(path, e))?.len();
    if size < 16 + len {
        return Err(truncated(16 + len, size as usize));
    }
    let mut buf = prefix.to_vec();
    buf.resize(16 + len as usize, 0);
    file.read_exact(&mut buf[16..]).map_err(|e| Error::io(path, e))?;
    Ok(parse_header(&buf)?.0)
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..])? {
            0 => break,
            k => n += k,
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::Coeff;

    fn sample() -> Trajectory {
        let g = Grid::square(8, 2.0).unwrap();
        let frames = (0..3)
            .map(|i| Field::from_fn_2d(g, |x, y| (x * (i + 1) as f64).sin() + y * 1e-3).unwrap())
            .collect();
        let mut t = Trajectory::new(frames, 0.25).unwrap().with_metadata([(Coeff::Nu, 1e-3)].into(), 9, "navierstokes");
        t.solver.insert("scheme".into(), "implicit_midpoint".into());
        t
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.opstraj");
        let t = sample();
        write_trajectory(&p, &t).unwrap();
        assert_eq!(read_trajectory(&p).unwrap(), t);
        let h = read_header(&p).unwrap();
        assert_eq!((h.frames, h.channels, h.seed), (3, 1, 9));
        assert_eq!(h.payload_bytes, 3 * 64 * 8);
    }

    #[test]
    fn distinct_failures() {
        let bytes = encode_trajectory(&sample());
        assert!(matches!(decode_trajectory(&bytes[..bytes.len() - 20]), Err(Error::Format(FormatError::Truncated { .. }))));
        assert!(matches!(decode_trajectory(&bytes[..20]), Err(Error::Format(FormatError::Truncated { .. }))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_trajectory(&bad), Err(Error::Format(FormatError::BadMagic))));
        let mut flipped = bytes.clone();
        let n = flipped.len();
        flipped[n - 30] ^= 1;
        assert!(matches!(decode_trajectory(&flipped), Err(Error::Format(FormatError::ChecksumMismatch { .. }))));
        let mut header = bytes.clone();
        header[17] = b'#';
        assert!(matches!(decode_trajectory(&header), Err(Error::Format(FormatError::CorruptHeader(_)))));
    }
}
