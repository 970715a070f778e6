//! Dataset manifest CSV: `clip_id,split,label,audio_path`.

use super::{DatasetManifest, ManifestEntry, Split};
use crate::error::{Error, Result};
use std::collections::HashSet;
use std::path::Path;

const HEADER: [&str; 4] = ["clip_id", "split", "label", "audio_path"];

/// Parses a manifest CSV.
///
/// Labels are accepted case-insensitively as two-letter codes or full names.
/// Test rows may leave the label cell empty; train/validation rows must not.
pub fn parse_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err("manifest row", &path_str, 0, e))?;

    check_header(&mut reader, &path_str, &HEADER, "manifest row")?;

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err("manifest row", &path_str, 0, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(Error::InvalidRow {
                what: "manifest row",
                path: path_str.clone(),
                line,
                detail: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let clip_id = record[0].trim().to_string();
        if clip_id.is_empty() {
            return Err(Error::InvalidRow {
                what: "manifest row",
                path: path_str.clone(),
                line,
                detail: "empty clip_id".to_string(),
            });
        }
        if !seen.insert(clip_id.clone()) {
            return Err(Error::DuplicateClip {
                clip_id,
                path: path_str,
            });
        }
        let split: Split = record[1].parse()?;
        let label_cell = record[2].trim();
        let label = if label_cell.is_empty() {
            None
        } else {
            Some(label_cell.parse()?)
        };
        if label.is_none() && split != Split::Test {
            return Err(Error::MissingLabel {
                clip_id,
                split: split.to_string(),
            });
        }
        entries.push(ManifestEntry {
            clip_id,
            split,
            label,
            audio_path: record[3].trim().to_string(),
        });
    }
    Ok(DatasetManifest { entries })
}

/// Writes a manifest back out in the same CSV format.
pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(|e| csv_err("manifest row", &path_str, 0, e))?;
    writer
        .write_record(HEADER)
        .map_err(|e| csv_err("manifest row", &path_str, 0, e))?;
    for e in &manifest.entries {
        writer
            .write_record([
                e.clip_id.as_str(),
                e.split.as_str(),
                e.label.map_or("", |l| l.code()),
                e.audio_path.as_str(),
            ])
            .map_err(|err| csv_err("manifest row", &path_str, 0, err))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path_str.clone(), e))?;
    Ok(())
}

pub(super) fn check_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    path: &str,
    expected: &[&str],
    what: &'static str,
) -> Result<()> {
    let headers = reader
        .headers()
        .map_err(|e| csv_err(what, path, 1, e))?
        .clone();
    let got: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    if got != expected {
        return Err(Error::InvalidRow {
            what,
            path: path.to_string(),
            line: 1,
            detail: format!("bad header {got:?}, expected {expected:?}"),
        });
    }
    Ok(())
}

pub(super) fn csv_err(what: &'static str, path: &str, line: u64, err: csv::Error) -> Error {
    if let csv::ErrorKind::Io(io) = err.into_kind() {
        Error::io(path, io)
    } else {
        Error::InvalidRow {
            what,
            path: path.to_string(),
            line,
            detail: "malformed CSV".to_string(),
        }
    }
}
