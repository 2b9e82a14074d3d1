//! Report and manifest emission. Report bodies are deterministic functions
//! of the configuration; the manifest additionally carries wall time and a
//! timestamp.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// CSV per RFC 4180: UTF-8, '.' decimal separator, mandatory header row,
/// CRLF line endings, quotes doubled inside quoted fields.
pub fn write_csv(path: &Path, headers: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(
        &headers
            .iter()
            .map(|h| escape(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push_str("\r\n");
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        out.push_str(&row.iter().map(|f| escape(f)).collect::<Vec<_>>().join(","));
        out.push_str("\r\n");
    }
    fs::write(path, out)
}

fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut body = serde_json::to_string_pretty(value).expect("serializable report");
    body.push('\n');
    fs::write(path, body)
}

/// Manifest: config echo, library version, constants in force, wall time.
pub fn write_manifest(
    dir: &Path,
    experiment: &str,
    config: Value,
    tolerances: Value,
    threads: usize,
    wall_ms: u128,
) -> std::io::Result<()> {
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "config": config,
        "library_version": horolab::VERSION,
        "threads": threads,
        "tolerances": tolerances,
        "wall_time_ms": wall_ms,
        "unix_time": unix_time,
    });
    write_json(&dir.join("manifest.json"), &manifest)
}
