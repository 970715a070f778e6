//! Feature dump formats: debug CSV and the compact `AFF1` binary container.
//!
//! `AFF1` layout: 16-byte header (magic `AFF1`, u32 rows, u32 cols, u32
//! reserved zero), then rows x cols little-endian 32-bit floats, row-major,
//! one row per frame.

use super::{FeatureSequence, ShortTermFeatureVector};
use crate::error::{Error, Result};
use crate::FEATURE_DIM;
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"AFF1";

/// Writes `clip_id,frame_index,f00..f33` rows.
pub fn write_features_csv(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("clip_id,frame_index");
    for i in 0..FEATURE_DIM {
        header.push_str(&format!(",f{i:02}"));
    }
    writeln!(w, "{header}").map_err(|e| Error::io(&path_str, e))?;
    for (k, vec) in seq.vectors.iter().enumerate() {
        write!(w, "{},{}", seq.clip_id, k).map_err(|e| Error::io(&path_str, e))?;
        for v in &vec.values {
            write!(w, ",{v}").map_err(|e| Error::io(&path_str, e))?;
        }
        writeln!(w).map_err(|e| Error::io(&path_str, e))?;
    }
    w.flush().map_err(|e| Error::io(&path_str, e))?;
    Ok(())
}

/// Writes the binary `AFF1` container.
pub fn write_features_bin(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC).map_err(|e| Error::io(&path_str, e))?;
    w.write_u32::<LittleEndian>(seq.vectors.len() as u32)
        .map_err(|e| Error::io(&path_str, e))?;
    w.write_u32::<LittleEndian>(FEATURE_DIM as u32)
        .map_err(|e| Error::io(&path_str, e))?;
    w.write_u32::<LittleEndian>(0)
        .map_err(|e| Error::io(&path_str, e))?;
    for vec in &seq.vectors {
        for &v in &vec.values {
            w.write_f32::<LittleEndian>(v as f32)
                .map_err(|e| Error::io(&path_str, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path_str, e))?;
    Ok(())
}

/// Reads an `AFF1` container back; the clip id is supplied by the caller
/// since the container stores only the matrix.
pub fn read_features_bin(path: impl AsRef<Path>, clip_id: &str) -> Result<FeatureSequence> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| Error::io(&path_str, e))?;
    if &magic != MAGIC {
        return Err(Error::BadContainer {
            format: "AFF1",
            path: path_str,
            detail: format!("bad magic {magic:?}"),
        });
    }
    let rows = r
        .read_u32::<LittleEndian>()
        .map_err(|e| Error::io(&path_str, e))? as usize;
    let cols = r
        .read_u32::<LittleEndian>()
        .map_err(|e| Error::io(&path_str, e))? as usize;
    let _reserved = r
        .read_u32::<LittleEndian>()
        .map_err(|e| Error::io(&path_str, e))?;
    if cols != FEATURE_DIM {
        return Err(Error::BadContainer {
            format: "AFF1",
            path: path_str,
            detail: format!("expected {FEATURE_DIM} columns, got {cols}"),
        });
    }
    let mut vectors = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut values = [0.0f64; FEATURE_DIM];
        for v in &mut values {
            *v = f64::from(
                r.read_f32::<LittleEndian>()
                    .map_err(|e| Error::io(&path_str, e))?,
            );
        }
        vectors.push(ShortTermFeatureVector { values });
    }
    Ok(FeatureSequence::new(clip_id, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_sequence(frames: usize) -> FeatureSequence {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let vectors = (0..frames)
            .map(|_| {
                let mut values = [0.0; FEATURE_DIM];
                for v in &mut values {
                    *v = rng.gen_range(-5.0..5.0);
                }
                ShortTermFeatureVector { values }
            })
            .collect();
        FeatureSequence::new("clip", vectors)
    }

    #[test]
    fn binary_round_trip_at_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let seq = random_sequence(19);
        let p = dir.path().join("f.aff");
        write_features_bin(&seq, &p).unwrap();
        let back = read_features_bin(&p, "clip").unwrap();
        assert_eq!(back.vectors.len(), 19);
        for (a, b) in seq.vectors.iter().zip(&back.vectors) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() <= x.abs() * 1e-6 + 1e-6);
            }
        }
    }

    #[test]
    fn binary_header_is_sixteen_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let seq = random_sequence(2);
        let p = dir.path().join("f.aff");
        write_features_bin(&seq, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(bytes.len(), 16 + 2 * FEATURE_DIM * 4);
        assert_eq!(&bytes[..4], b"AFF1");
    }

    #[test]
    fn csv_has_header_and_one_row_per_frame() {
        let dir = tempfile::tempdir().unwrap();
        let seq = random_sequence(3);
        let p = dir.path().join("f.csv");
        write_features_csv(&seq, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("clip_id,frame_index,f00,f01"));
        assert!(lines[0].ends_with("f33"));
        assert!(lines[1].starts_with("clip,0,"));
    }

    #[test]
    fn bad_magic_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("junk.aff");
        std::fs::write(&p, b"NOPE\0\0\0\0\0\0\0\0\0\0\0\0").unwrap();
        assert!(matches!(
            read_features_bin(&p, "c"),
            Err(Error::BadContainer { .. })
        ));
    }
}
