//! Per-model score CSV: `clip_id,AN,DI,FE,HA,NE,SA,SU`.

use super::manifest::{check_header, csv_err};
use super::ExternalScoreSet;
use crate::error::{Error, Result};
use crate::models::ScoreVector;
use crate::NUM_CLASSES;
use std::path::Path;

const HEADER: [&str; 8] = ["clip_id", "AN", "DI", "FE", "HA", "NE", "SA", "SU"];

/// Parses a score CSV into an [`ExternalScoreSet`].
///
/// Each row carries 7 finite reals; no normalization is applied at parse
/// time, values are stored exactly as written.
pub fn parse_scores(path: impl AsRef<Path>, model_id: &str) -> Result<ExternalScoreSet> {
    let path_str = path.as_ref().display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(|e| csv_err("score row", &path_str, 0, e))?;

    check_header(&mut reader, &path_str, &HEADER, "score row")?;

    let mut set = ExternalScoreSet::new(model_id);
    for record in reader.records() {
        let record = record.map_err(|e| csv_err("score row", &path_str, 0, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 1 + NUM_CLASSES {
            return Err(Error::InvalidRow {
                what: "score row",
                path: path_str.clone(),
                line,
                detail: format!("expected 8 fields, got {}", record.len()),
            });
        }
        let clip_id = record[0].trim().to_string();
        let mut values = [0.0; NUM_CLASSES];
        for (k, v) in values.iter_mut().enumerate() {
            let cell = record[k + 1].trim();
            *v = cell.parse::<f64>().map_err(|_| Error::InvalidRow {
                what: "score row",
                path: path_str.clone(),
                line,
                detail: format!("non-numeric cell {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidRow {
                    what: "score row",
                    path: path_str.clone(),
                    line,
                    detail: format!("non-finite score {cell:?}"),
                });
            }
        }
        if set
            .scores
            .insert(clip_id.clone(), ScoreVector::new(values))
            .is_some()
        {
            return Err(Error::DuplicateClip {
                clip_id,
                path: path_str,
            });
        }
    }
    Ok(set)
}

/// Writes a score set in the same CSV format, one row per clip.
///
/// Values are printed in shortest round-trip form, so reading the file back
/// reproduces them exactly.
pub fn write_scores(set: &ExternalScoreSet, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(|e| csv_err("score row", &path_str, 0, e))?;
    writer
        .write_record(HEADER)
        .map_err(|e| csv_err("score row", &path_str, 0, e))?;
    for (clip_id, scores) in &set.scores {
        let mut record = vec![clip_id.clone()];
        record.extend(scores.values().iter().map(|v| v.to_string()));
        writer
            .write_record(&record)
            .map_err(|e| csv_err("score row", &path_str, 0, e))?;
    }
    writer.flush().map_err(|e| Error::io(path_str, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        p
    }

    const HEAD: &str = "clip_id,AN,DI,FE,HA,NE,SA,SU\n";

    #[test]
    fn parses_rows_without_normalizing() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(
            dir.path(),
            "s.csv",
            &format!("{HEAD}c1,1,0,0,0,0,0,0\nc2,0.2,0.2,0.2,0.1,0.1,0.1,0.1\n"),
        );
        let set = parse_scores(&p, "m").unwrap();
        assert_eq!(set.model_id, "m");
        assert_eq!(
            set.scores["c1"].values(),
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        // stored unmodified, not renormalized
        assert_eq!(
            set.scores["c2"].values(),
            &[0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1]
        );
    }

    #[test]
    fn wrong_arity_and_bad_cells_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", &format!("{HEAD}c1,1,0,0,0,0,0\n"));
        assert!(matches!(
            parse_scores(&p, "m"),
            Err(Error::InvalidRow { .. })
        ));
        let p = write_file(dir.path(), "b.csv", &format!("{HEAD}c1,1,0,x,0,0,0,0\n"));
        assert!(matches!(
            parse_scores(&p, "m"),
            Err(Error::InvalidRow { .. })
        ));
        let p = write_file(
            dir.path(),
            "c.csv",
            &format!("{HEAD}c1,1,0,0,0,0,0,0\nc1,0,1,0,0,0,0,0\n"),
        );
        assert!(matches!(
            parse_scores(&p, "m"),
            Err(Error::DuplicateClip { .. })
        ));
    }

    #[test]
    fn scores_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = ExternalScoreSet::new("m");
        set.scores.insert(
            "c1".into(),
            ScoreVector::new([0.1, 0.2, 0.30000000000000004, 0.0, -1.5, 2e-17, 0.4]),
        );
        let p = dir.path().join("s.csv");
        write_scores(&set, &p).unwrap();
        let back = parse_scores(&p, "m").unwrap();
        assert_eq!(back, set);
    }
}
