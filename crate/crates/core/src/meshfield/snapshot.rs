//! Snapshot files: `<stem>.csv` with one row per node and `<stem>.json`
//! carrying the run metadata (`SnapshotMeta`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BoundarySpec, Mesh, MeshField};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "x,u,u',u'',u'''";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub time: f64,
    pub epsilon: f64,
    #[serde(flatten)]
    pub spec: BoundarySpec,
}

pub fn snapshot_csv(field: &MeshField) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (x, d) in field.mesh().nodes().iter().zip(field.nodal()) {
        let _ = writeln!(
            out,
            "{x:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            d[0], d[1], d[2], d[3]
        );
    }
    out
}

/// Writes both files and returns their paths (csv first).
pub fn write_snapshot(stem: &Path, field: &MeshField, meta: &SnapshotMeta) -> Result<[PathBuf; 2]> {
    let csv = stem.with_extension("csv");
    let json = stem.with_extension("json");
    fs::write(&csv, snapshot_csv(field))?;
    fs::write(&json, serde_json::to_string_pretty(meta)?)?;
    Ok([csv, json])
}

pub fn read_snapshot(stem: &Path) -> Result<(MeshField, SnapshotMeta)> {
    let text = fs::read_to_string(stem.with_extension("csv"))?;
    let meta: SnapshotMeta =
        serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidConfig("snapshot csv header mismatch".into()));
    }
    let mut nodes = Vec::new();
    let mut nodal = Vec::new();
    for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("snapshot row {row}: {e}")))?;
        if vals.len() != 5 {
            return Err(Error::InvalidConfig(format!(
                "snapshot row {row}: {} columns",
                vals.len()
            )));
        }
        nodes.push(vals[0]);
        nodal.push([vals[1], vals[2], vals[3], vals[4]]);
    }
    Ok((MeshField::new(Mesh::new(nodes)?, nodal)?, meta))
}
