//! `DTBD` data containers: a 24-byte little-endian header (magic, version,
//! `m`, `2n`, `τ`) followed by the frames in time order, each row-major.

use std::io::Write;
use std::path::Path;

use dtb_core::forward::DataSet;
use dtb_core::linalg::DenseMatrix;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"DTBD";
pub const VERSION: u32 = 1;
const HEADER: usize = 24;

pub fn encode(data: &DataSet) -> Vec<u8> {
    let m = data.m();
    let mut out = Vec::with_capacity(HEADER + 8 * data.two_n() * m * m);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(data.two_n() as u32).to_le_bytes());
    out.extend_from_slice(&data.tau().to_le_bytes());
    for f in data.frames() {
        for v in f.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("eight bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<DataSet> {
    if bytes.len() < HEADER {
        return Err(CliError::Format(format!("container has {} bytes, header needs {HEADER}", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(CliError::Format(format!(
            "bad magic {:?}, expected \"DTBD\"",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(CliError::Format(format!("unsupported container version {version}")));
    }
    let m = u32_at(bytes, 8) as usize;
    let two_n = u32_at(bytes, 12) as usize;
    let tau = f64_at(bytes, 16);
    let expected = m
        .checked_mul(m)
        .and_then(|v| v.checked_mul(two_n))
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(HEADER));
    if expected != Some(bytes.len()) {
        return Err(CliError::Format(format!("container length {} does not match m = {m}, 2n = {two_n}", bytes.len())));
    }
    let frames = (0..two_n)
        .map(|k| {
            let base = HEADER + 8 * k * m * m;
            let values = (0..m * m).map(|i| f64_at(bytes, base + 8 * i)).collect();
            DenseMatrix::from_row_major(m, m, values).expect("sizes checked")
        })
        .collect();
    DataSet::new(tau, frames).map_err(|e| CliError::Format(format!("invalid frames: {e}")))
}

pub fn read(path: &Path) -> Result<DataSet> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    decode(&bytes).map_err(|e| match e {
        CliError::Format(msg) => CliError::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let io = |e| CliError::io(path.display().to_string(), e);
    let mut file = std::fs::File::create(&tmp).map_err(io)?;
    file.write_all(bytes).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

pub fn write(path: &Path, data: &DataSet) -> Result<()> {
    write_atomic(path, &encode(data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DataSet {
        let f0 = DenseMatrix::from_rows(&[&[1.0, 0.25], &[0.25, 2.0]]);
        let f1 = DenseMatrix::from_rows(&[&[-0.5, 1e-300], &[1e-300, std::f64::consts::PI]]);
        DataSet::new(0.75, vec![f0, f1]).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let d = sample();
        let bytes = encode(&d);
        assert_eq!(bytes.len(), 24 + 8 * 2 * 4);
        let back = decode(&bytes).unwrap();
        assert_eq!(back, d);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn malformed_containers_are_rejected() {
        let mut bytes = encode(&sample());
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(CliError::Format(_))));
        let bytes = encode(&sample());
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(CliError::Format(_))));
        assert!(matches!(decode(&bytes[..10]), Err(CliError::Format(_))));
        let mut asym = bytes.clone();
        asym[HEADER + 8..HEADER + 16].copy_from_slice(&5.0f64.to_le_bytes());
        assert!(matches!(decode(&asym), Err(CliError::Format(_))));
    }
}
