use std::path::Path;

use crate::error::{Error, Result};

pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = super::read_to_string(path)?;
    parse_labels(&text, path)
}

pub fn parse_labels(text: &str, origin: &Path) -> Result<Vec<usize>> {
    parse_integers(text, origin, "class id")
}

/// Node indices, one per line, e.g. an explicit known set.
pub fn load_node_list(path: &Path) -> Result<Vec<usize>> {
    let text = super::read_to_string(path)?;
    parse_integers(&text, path, "node index")
}

fn parse_integers(text: &str, origin: &Path, what: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: usize = line.parse().map_err(|e| {
            Error::parse_line(origin, no + 1, format!("invalid {what} '{line}': {e}"))
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut s = String::with_capacity(labels.len() * 3);
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    super::write_atomic(path, s.as_bytes())
}
