//! Binary grid snapshots: `FWGF`, a little-endian u32 header length, a JSON
//! header `{n, N, L, tag}`, then interleaved little-endian f64 (re, im) pairs
//! in row-major order.

use super::grid::{FieldDomain, GridField, GridSpec};
use crate::error::{param, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"FWGF";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotHeader {
    n: usize,
    #[serde(rename = "N")]
    size: usize,
    #[serde(rename = "L")]
    box_len: f64,
    tag: FieldDomain,
}

pub fn write_snapshot(field: &GridField, mut out: impl Write) -> Result<()> {
    let spec = field.spec();
    let header = serde_json::to_vec(&SnapshotHeader {
        n: spec.n,
        size: spec.size,
        box_len: spec.box_len,
        tag: field.domain(),
    })?;
    out.write_all(MAGIC)?;
    out.write_all(&(header.len() as u32).to_le_bytes())?;
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(field.values().len() * 16);
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(mut input: impl Read) -> Result<GridField> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(param("not a grid snapshot"));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut header = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut header)?;
    let header: SnapshotHeader = serde_json::from_slice(&header)?;
    let spec = GridSpec::new(header.n, header.size, header.box_len)?;
    let mut raw = vec![0u8; spec.len() * 16];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    GridField::from_values(spec, values, header.tag)
}

pub fn save_snapshot(field: &GridField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_snapshot(field, std::io::BufWriter::new(file))
}

pub fn load_snapshot(path: &Path) -> Result<GridField> {
    read_snapshot(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let spec = GridSpec::new(2, 8, 1.5).unwrap();
        let f = GridField::from_fn(spec, |x| Complex64::new(x[0], -x[1] * 2.0));
        let mut bytes = Vec::new();
        write_snapshot(&f, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"FWGF");
        let back = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(back, f);
        bytes[0] = b'X';
        assert!(read_snapshot(bytes.as_slice()).is_err());
    }
}
