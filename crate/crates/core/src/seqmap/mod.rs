//! Sequence-length padding, holistic functional summaries and image-like map
//! construction over short-term feature sequences.
//!
//! The map path stacks the 34-dim vectors into a 34×n matrix, pads the
//! columns up to a multiple of the tile stride, cuts 34×34 tiles at 50%
//! overlap and pads the tile sequence to a minimum length by replicating the
//! last tile.

mod dump;
mod functionals;

pub use dump::{read_maps_bin, write_maps_bin, write_tiles_csv};
pub use functionals::Functional;

use crate::error::{Error, Result};
use crate::ingest::AudioClip;
use crate::stfeat::{featurize_clip, FeatureSequence};
use crate::FEATURE_DIM;
use ndarray::{s, Array2};

/// Minimum feature-sequence length fed to the sequence classifier.
pub const MIN_SEQ_LEN: usize = 16;
/// Side of one square image-like tile (equals the feature dimension).
pub const TILE_SIDE: usize = 34;
/// Column stride between consecutive tiles (50% overlap).
pub const TILE_STRIDE: usize = 17;
/// Minimum number of tiles per clip.
pub const MIN_TILES: usize = 8;

/// Clip-level summary: `functionals.len() * 34` values, functional-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HolisticVector {
    pub clip_id: String,
    pub values: Vec<f64>,
    pub functional_names: Vec<String>,
}

/// One 34×34 image-like tile.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMap {
    matrix: Array2<f64>,
}

impl ImageMap {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        if matrix.nrows() != TILE_SIDE || matrix.ncols() != TILE_SIDE {
            return Err(Error::DimensionMismatch {
                context: "image map".to_string(),
                expected: TILE_SIDE,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "image map".to_string(),
            });
        }
        Ok(ImageMap { matrix })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }
}

/// Ordered image-like tiles of one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSequence {
    pub clip_id: String,
    pub tiles: Vec<ImageMap>,
    /// Tile count before minimum-length padding: `(n' - 17) / 17`.
    pub pre_pad_tile_count: usize,
}

/// Replicates the last feature vector until the sequence reaches `min_len`.
///
/// Sequences already at or above the minimum are returned unchanged;
/// `original_length` always keeps the pre-padding frame count. Idempotent.
pub fn pad_min_length(seq: &FeatureSequence, min_len: usize) -> FeatureSequence {
    let mut out = seq.clone();
    if let Some(last) = out.vectors.last().copied() {
        while out.vectors.len() < min_len {
            out.vectors.push(last);
        }
    }
    out
}

/// Applies each functional per feature dimension over the unpadded sequence.
pub fn summarize_holistic(
    seq: &FeatureSequence,
    functionals: &[Functional],
) -> Result<HolisticVector> {
    let frames = seq.unpadded();
    if frames.is_empty() {
        return Err(Error::Precondition(format!(
            "clip {:?}: cannot summarize an empty sequence",
            seq.clip_id
        )));
    }
    let mut values = Vec::with_capacity(functionals.len() * FEATURE_DIM);
    let mut column = Vec::with_capacity(frames.len());
    for functional in functionals {
        for dim in 0..FEATURE_DIM {
            column.clear();
            column.extend(frames.iter().map(|v| v.values[dim]));
            values.push(functional.apply(&column));
        }
    }
    Ok(HolisticVector {
        clip_id: seq.clip_id.clone(),
        values,
        functional_names: functionals.iter().map(|f| f.name().to_string()).collect(),
    })
}

/// Stacks the sequence into a 34×n matrix: column j is feature vector j.
pub fn build_column_map(seq: &FeatureSequence) -> Array2<f64> {
    let n = seq.vectors.len();
    let mut map = Array2::zeros((FEATURE_DIM, n));
    for (j, vec) in seq.vectors.iter().enumerate() {
        for (i, &v) in vec.values.iter().enumerate() {
            map[[i, j]] = v;
        }
    }
    map
}

/// Pads columns by replicating the last one until the column count is the
/// smallest multiple of [`TILE_STRIDE`] that is at least `max(n, TILE_SIDE)`.
///
/// Returns the padded matrix together with the new column count n'.
pub fn pad_columns(map: &Array2<f64>) -> (Array2<f64>, usize) {
    let n = map.ncols();
    let target = n.max(TILE_SIDE);
    let padded_cols = target.div_ceil(TILE_STRIDE) * TILE_STRIDE;
    if padded_cols == n {
        return (map.clone(), n);
    }
    let mut out = Array2::zeros((map.nrows(), padded_cols));
    out.slice_mut(s![.., ..n]).assign(map);
    let last = map.column(n - 1).to_owned();
    for j in n..padded_cols {
        out.column_mut(j).assign(&last);
    }
    (out, padded_cols)
}

/// Cuts the padded matrix into 34×34 tiles at stride 17.
///
/// Tile t spans columns `[17t, 17t + 34)`, so consecutive tiles share exactly
/// 17 columns; the tile count is `(n' - 17) / 17`.
pub fn tile_map(map: &Array2<f64>) -> Result<Vec<ImageMap>> {
    let cols = map.ncols();
    if map.nrows() != TILE_SIDE {
        return Err(Error::DimensionMismatch {
            context: "map rows".to_string(),
            expected: TILE_SIDE,
            actual: map.nrows(),
        });
    }
    if cols % TILE_STRIDE != 0 || cols < TILE_SIDE {
        return Err(Error::Precondition(format!(
            "map has {cols} columns; need a multiple of {TILE_STRIDE} at least {TILE_SIDE}"
        )));
    }
    let count = (cols - TILE_STRIDE) / TILE_STRIDE;
    (0..count)
        .map(|t| {
            let start = t * TILE_STRIDE;
            ImageMap::new(map.slice(s![.., start..start + TILE_SIDE]).to_owned())
        })
        .collect()
}

/// Replicates the last tile until the sequence reaches `min_len` tiles.
///
/// `pre_pad_tile_count` records the original count. Idempotent.
pub fn pad_tile_sequence(
    clip_id: impl Into<String>,
    tiles: Vec<ImageMap>,
    min_len: usize,
) -> Result<MapSequence> {
    if tiles.is_empty() {
        return Err(Error::Precondition(
            "cannot pad an empty tile sequence".to_string(),
        ));
    }
    let pre_pad_tile_count = tiles.len();
    let mut tiles = tiles;
    while tiles.len() < min_len {
        tiles.push(tiles.last().unwrap().clone());
    }
    Ok(MapSequence {
        clip_id: clip_id.into(),
        tiles,
        pre_pad_tile_count,
    })
}

/// Full map pipeline for one clip:
/// featurize → stack → pad columns → tile → pad tile sequence.
pub fn maps_for_clip(clip: &AudioClip, window_ms: u32, step_ms: u32) -> Result<MapSequence> {
    let seq = featurize_clip(clip, window_ms, step_ms)?;
    maps_for_sequence(&seq)
}

/// Map pipeline starting from an already-extracted feature sequence.
pub fn maps_for_sequence(seq: &FeatureSequence) -> Result<MapSequence> {
    let map = build_column_map(seq);
    let (padded, _) = pad_columns(&map);
    let tiles = tile_map(&padded)?;
    pad_tile_sequence(seq.clip_id.clone(), tiles, MIN_TILES)
}
