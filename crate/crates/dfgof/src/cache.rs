//! On-disk cache of null tables, enabled by `DFGOF_TABLE_CACHE`.
//!
//! A table file is one JSON header line followed by the sorted values, one
//! per line. Files that fail to parse or do not match the request are
//! ignored and rewritten.

use std::fs;
use std::path::{Path, PathBuf};

use dfgof_core::statistics::{NullTable, StatisticKind};
use dfgof_core::{AnchorPair, AnchorTag};
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::formats::{fmt_f64, sha256_hex, VERSION};
use crate::parallel;

pub const CACHE_ENV: &str = "DFGOF_TABLE_CACHE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TableHeader {
    version: String,
    statistic: String,
    m: usize,
    anchor_preset: String,
    anchor_fingerprint: u64,
    has_rhat: bool,
    reps: usize,
    seed: u64,
}

impl TableHeader {
    fn new(kind: StatisticKind, tag: AnchorTag, m: usize, reps: usize, seed: u64) -> Self {
        Self {
            version: VERSION.to_string(),
            statistic: kind.as_str().to_string(),
            m,
            anchor_preset: tag.preset.as_str().to_string(),
            anchor_fingerprint: tag.fingerprint,
            has_rhat: tag.has_rhat,
            reps,
            seed,
        }
    }

    fn file_name(&self) -> String {
        let key = serde_json::to_vec(self).expect("header serializes");
        format!(
            "{}-m{}-{}.table",
            self.statistic,
            self.m,
            &sha256_hex(&key)[..16]
        )
    }
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn load(
    path: &Path,
    header: &TableHeader,
    kind: StatisticKind,
    tag: AnchorTag,
) -> Option<NullTable> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    let stored: TableHeader = serde_json::from_str(lines.next()?).ok()?;
    if &stored != header {
        return None;
    }
    let values = lines
        .map(|l| l.parse::<f64>().ok())
        .collect::<Option<Vec<f64>>>()?;
    if values.len() != header.reps {
        return None;
    }
    NullTable::from_parts(kind, header.m, tag, header.seed, values).ok()
}

fn store(path: &Path, header: &TableHeader, table: &NullTable) -> std::io::Result<()> {
    let mut text = serde_json::to_string(header).expect("header serializes");
    text.push('\n');
    for v in table.values() {
        text.push_str(&fmt_f64(*v));
        text.push('\n');
    }
    // write then rename so concurrent readers never see a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

/// Loads the table from `dir` when present, otherwise simulates it and
/// stores it there. Cache failures only cost the recomputation.
pub fn null_table_cached(
    dir: Option<&Path>,
    kind: StatisticKind,
    anchor: &AnchorPair,
    reps: usize,
    seed: u64,
    threads: usize,
) -> CliResult<NullTable> {
    let tag = anchor.tag();
    let header = TableHeader::new(kind, tag, anchor.dim(), reps, seed);
    let path = dir.map(|d| d.join(header.file_name()));
    if let Some(p) = &path {
        if let Some(t) = load(p, &header, kind, tag) {
            return Ok(t);
        }
    }
    let table = parallel::null_table(kind, anchor, reps, seed, threads)?;
    if let (Some(d), Some(p)) = (dir, &path) {
        if fs::create_dir_all(d).is_ok() {
            let _ = store(p, &header, &table);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dfgof_core::AnchorPreset;

    #[test]
    fn cached_table_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = AnchorPair::preset(AnchorPreset::Diagonal, 4).unwrap();
        let fresh =
            null_table_cached(Some(dir.path()), StatisticKind::KsZ, &a, 1000, 9, 2).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let again =
            null_table_cached(Some(dir.path()), StatisticKind::KsZ, &a, 1000, 9, 1).unwrap();
        assert_eq!(fresh, again);
        let uncached = null_table_cached(None, StatisticKind::KsZ, &a, 1000, 9, 1).unwrap();
        assert_eq!(fresh, uncached);
    }

    #[test]
    fn corrupt_file_is_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let a = AnchorPair::preset(AnchorPreset::E1, 4).unwrap();
        let t = null_table_cached(Some(dir.path()), StatisticKind::CvmZ, &a, 1000, 1, 1).unwrap();
        let file = fs::read_dir(dir.path())
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        fs::write(&file, "garbage").unwrap();
        let again =
            null_table_cached(Some(dir.path()), StatisticKind::CvmZ, &a, 1000, 1, 1).unwrap();
        assert_eq!(t, again);
        assert!(fs::read_to_string(&file).unwrap().starts_with('{'));
    }
}
