use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const ARBF_MAGIC: &[u8; 4] = b"ARBF";
pub const ARBF_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 8;

/// Loads either format; files starting with the `ARBF` magic are binary.
pub fn load_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(ARBF_MAGIC) {
        return decode_arbf(&bytes, path);
    }
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::parse_offset(path, e.valid_up_to(), "neither ARBF nor UTF-8 text"))?;
    parse_feature_text(text, path)
}

/// One node per line. Fields split on commas when the line has any, otherwise
/// on tabs or spaces.
pub fn parse_feature_text(text: &str, origin: &Path) -> Result<FeatureMatrix> {
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = values.len();
        let mut push = |tok: &str| -> Result<()> {
            let tok = tok.trim();
            let v: f64 = tok.parse().map_err(|e| {
                Error::parse_line(origin, line_no, format!("invalid number '{tok}': {e}"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse_line(
                    origin,
                    line_no,
                    format!("non-finite value '{tok}'"),
                ));
            }
            values.push(v);
            Ok(())
        };
        if line.contains(',') {
            line.split(',').try_for_each(&mut push)?;
        } else {
            line.split_whitespace().try_for_each(&mut push)?;
        }
        let n = values.len() - before;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(Error::parse_line(
                    origin,
                    line_no,
                    format!("ragged row: {n} fields, expected {w}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    FeatureMatrix::from_vec(rows, width.unwrap_or(0), values)
}

pub fn encode_arbf(m: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + m.as_slice().len() * 8);
    out.extend_from_slice(ARBF_MAGIC);
    out.push(ARBF_VERSION);
    out.extend_from_slice(&(m.n_nodes() as u64).to_le_bytes());
    out.extend_from_slice(&(m.n_features() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_arbf(bytes: &[u8], origin: &Path) -> Result<FeatureMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::parse_offset(
            origin,
            bytes.len(),
            "truncated ARBF header",
        ));
    }
    if &bytes[..4] != ARBF_MAGIC {
        return Err(Error::parse_offset(origin, 0, "bad magic, expected ARBF"));
    }
    if bytes[4] != ARBF_VERSION {
        return Err(Error::parse_offset(
            origin,
            4,
            format!("unsupported ARBF version {}", bytes[4]),
        ));
    }
    let n = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let f = u64::from_le_bytes(bytes[13..21].try_into().unwrap());
    let expected = n
        .checked_mul(f)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(HEADER_LEN as u64))
        .ok_or_else(|| Error::parse_offset(origin, 5, "ARBF dimensions overflow"))?;
    if expected != bytes.len() as u64 {
        return Err(Error::parse_offset(
            origin,
            HEADER_LEN,
            format!(
                "header declares {n}x{f} values ({expected} bytes) but file has {} bytes",
                bytes.len()
            ),
        ));
    }
    let mut values = Vec::with_capacity((n * f) as usize);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if v.is_nan() {
            return Err(Error::parse_offset(origin, HEADER_LEN + 8 * i, "NaN entry"));
        }
        values.push(v);
    }
    FeatureMatrix::from_vec(n as usize, f as usize, values)
}

/// Writes the binary format atomically.
pub fn save_features(path: &Path, m: &FeatureMatrix) -> Result<()> {
    super::write_atomic(path, &encode_arbf(m))
}

/// Comma-separated text using shortest round-trip float formatting.
pub fn save_features_text(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let mut s = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    super::write_atomic(path, s.as_bytes())
}
