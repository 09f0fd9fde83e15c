//! File formats, synthetic data, and result serialization.
//!
//! * Edge lists: one `u v` pair per line, whitespace separated, `#` comments,
//!   optional `N <count>` header fixing the node count.
//! * Feature matrices: delimiter-separated text, one node per row, or the
//!   `ARBF` binary layout (magic, version byte, `N` and `F` as u64 LE, then
//!   `N*F` row-major f64 LE).
//! * Labels: one non-negative class id per line.

mod edges;
mod features;
mod generate;
mod labels;

pub use edges::{
    load_edge_list, load_edge_list_remapped, parse_edge_list, save_edge_list, EdgeList,
};
pub use features::{
    decode_arbf, encode_arbf, load_feature_matrix, parse_feature_text, save_features,
    save_features_text, ARBF_MAGIC, ARBF_VERSION,
};
pub use generate::{
    generate_longtail_graph, generate_random_graph, synthesize_bundle, truncated_power_law,
    uniform_features, DatasetBundle, DegreeHistogram, LongTailParams, SynthParams,
};
pub use labels::{load_labels, load_node_list, parse_labels, save_labels};

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Serializes any report as pretty JSON. Struct fields keep declaration order
/// and maps are ordered, so output is stable across runs.
pub fn save_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::input(format!("report does not serialize: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
