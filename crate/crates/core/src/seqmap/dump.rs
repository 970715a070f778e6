//! Map dumps: binary `AFM1` container and a per-tile debug CSV.
//!
//! `AFM1` layout: magic `AFM1`, u32 tile_count, then each 34×34 tile
//! row-major as little-endian 32-bit floats.

use super::{ImageMap, MapSequence, TILE_SIDE};
use crate::error::{Error, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"AFM1";

pub fn write_maps_bin(seq: &MapSequence, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC).map_err(|e| Error::io(&path_str, e))?;
    w.write_u32::<LittleEndian>(seq.tiles.len() as u32)
        .map_err(|e| Error::io(&path_str, e))?;
    for tile in &seq.tiles {
        for &v in tile.matrix().iter() {
            w.write_f32::<LittleEndian>(v as f32)
                .map_err(|e| Error::io(&path_str, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path_str, e))?;
    Ok(())
}

pub fn read_maps_bin(path: impl AsRef<Path>, clip_id: &str) -> Result<MapSequence> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| Error::io(&path_str, e))?;
    if &magic != MAGIC {
        return Err(Error::BadContainer {
            format: "AFM1",
            path: path_str,
            detail: format!("bad magic {magic:?}"),
        });
    }
    let count = r
        .read_u32::<LittleEndian>()
        .map_err(|e| Error::io(&path_str, e))? as usize;
    let mut tiles = Vec::with_capacity(count);
    for _ in 0..count {
        let mut matrix = Array2::zeros((TILE_SIDE, TILE_SIDE));
        for v in matrix.iter_mut() {
            *v = f64::from(
                r.read_f32::<LittleEndian>()
                    .map_err(|e| Error::io(&path_str, e))?,
            );
        }
        tiles.push(ImageMap::new(matrix)?);
    }
    Ok(MapSequence {
        clip_id: clip_id.to_string(),
        tiles,
        pre_pad_tile_count: count,
    })
}

/// Debug rendering: one CSV per call, tiles separated by `tile,<index>` rows.
pub fn write_tiles_csv(seq: &MapSequence, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut w = BufWriter::new(file);
    for (t, tile) in seq.tiles.iter().enumerate() {
        writeln!(w, "tile,{t}").map_err(|e| Error::io(&path_str, e))?;
        for row in tile.matrix().rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(&path_str, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path_str, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmap::{build_column_map, maps_for_sequence};
    use crate::stfeat::{FeatureSequence, ShortTermFeatureVector};
    use crate::FEATURE_DIM;

    fn map_sequence(n: usize) -> MapSequence {
        let vectors = (0..n)
            .map(|j| ShortTermFeatureVector {
                values: std::array::from_fn(|i| (i * n + j) as f64 * 0.25),
            })
            .collect();
        let seq = FeatureSequence::new("c", vectors);
        let _ = build_column_map(&seq);
        maps_for_sequence(&seq).unwrap()
    }

    #[test]
    fn maps_round_trip_at_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let ms = map_sequence(40);
        let p = dir.path().join("m.afm");
        write_maps_bin(&ms, &p).unwrap();
        let back = read_maps_bin(&p, "c").unwrap();
        assert_eq!(back.tiles.len(), ms.tiles.len());
        for (a, b) in ms.tiles.iter().zip(&back.tiles) {
            for (x, y) in a.matrix().iter().zip(b.matrix().iter()) {
                assert!((x - y).abs() <= x.abs() * 1e-6 + 1e-6);
            }
        }
    }

    #[test]
    fn tile_csv_contains_all_tiles() {
        let dir = tempfile::tempdir().unwrap();
        let ms = map_sequence(10);
        let p = dir.path().join("m.csv");
        write_tiles_csv(&ms, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("tile,")).count(), 8);
        assert_eq!(text.lines().count(), 8 * (TILE_SIDE + 1));
    }
}
