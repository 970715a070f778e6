//! Uniform score emission: run any trained classifier over a manifest split
//! and collect one normalized ScoreVector per clip.

use super::{LinearSvmModel, LstmModel, ScoreVector};
use crate::error::{Error, Result};
use crate::ingest::{decode_wav, resample, DatasetManifest, ExternalScoreSet, Split};
use crate::seqmap::{maps_for_sequence, pad_min_length, summarize_holistic, MapSequence};
use crate::stfeat::{featurize_clip, FeatureSequence};
use crate::CANONICAL_SAMPLE_RATE;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Which audio representation a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    HolisticSvm,
    SeqLstm,
    MapLstm,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::HolisticSvm => "holistic-svm",
            Representation::SeqLstm => "seq-lstm",
            Representation::MapLstm => "map-lstm",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Representation::HolisticSvm => 0,
            Representation::SeqLstm => 1,
            Representation::MapLstm => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Representation> {
        match tag {
            0 => Some(Representation::HolisticSvm),
            1 => Some(Representation::SeqLstm),
            2 => Some(Representation::MapLstm),
            _ => None,
        }
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "holistic-svm" => Ok(Representation::HolisticSvm),
            "seq-lstm" => Ok(Representation::SeqLstm),
            "map-lstm" => Ok(Representation::MapLstm),
            _ => Err(Error::Precondition(format!(
                "unknown representation {s:?} (expected holistic-svm, seq-lstm or map-lstm)"
            ))),
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A classifier paired with the representation it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Svm(LinearSvmModel),
    SeqLstm(LstmModel),
    MapLstm(LstmModel),
}

impl TrainedModel {
    pub fn representation(&self) -> Representation {
        match self {
            TrainedModel::Svm(_) => Representation::HolisticSvm,
            TrainedModel::SeqLstm(_) => Representation::SeqLstm,
            TrainedModel::MapLstm(_) => Representation::MapLstm,
        }
    }
}

/// Framing and padding constants shared by every pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub sample_rate: u32,
    pub window_ms: u32,
    pub step_ms: u32,
    pub min_seq_len: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            sample_rate: CANONICAL_SAMPLE_RATE,
            window_ms: crate::stfeat::DEFAULT_WINDOW_MS,
            step_ms: crate::stfeat::DEFAULT_STEP_MS,
            min_seq_len: crate::seqmap::MIN_SEQ_LEN,
        }
    }
}

/// Resolves a manifest audio path against the manifest's directory.
pub fn resolve_audio_path(base_dir: &Path, audio_path: &str) -> PathBuf {
    let p = Path::new(audio_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Decodes, resamples and featurizes one clip.
pub fn load_feature_sequence(
    base_dir: &Path,
    clip_id: &str,
    audio_path: &str,
    params: &PipelineParams,
) -> Result<FeatureSequence> {
    let path = resolve_audio_path(base_dir, audio_path);
    let run = || -> Result<FeatureSequence> {
        let clip = decode_wav(&path)?;
        let clip = resample(&clip, params.sample_rate)?;
        let mut seq = featurize_clip(&clip, params.window_ms, params.step_ms)?;
        seq.clip_id = clip_id.to_string();
        Ok(seq)
    };
    run().map_err(|e| e.for_clip(clip_id))
}

/// Flattens each 34×34 tile row-major into a 1156-dim vector, order kept.
pub fn flatten_tiles(seq: &MapSequence) -> Vec<Vec<f64>> {
    seq.tiles
        .iter()
        .map(|tile| tile.matrix().iter().copied().collect())
        .collect()
}

/// Scores one already-featurized clip with the model's representation path.
pub fn score_sequence(model: &TrainedModel, seq: &FeatureSequence, params: &PipelineParams) -> Result<ScoreVector> {
    match model {
        TrainedModel::Svm(svm) => {
            let holistic = summarize_holistic(seq, svm.functionals())?;
            svm.predict(&holistic)
        }
        TrainedModel::SeqLstm(lstm) => {
            let padded = pad_min_length(seq, params.min_seq_len);
            let inputs: Vec<Vec<f64>> = padded.vectors.iter().map(|v| v.values.to_vec()).collect();
            Ok(lstm.forward(&inputs)?.0)
        }
        TrainedModel::MapLstm(lstm) => {
            let maps = maps_for_sequence(seq)?;
            let inputs = flatten_tiles(&maps);
            Ok(lstm.forward(&inputs)?.0)
        }
    }
}

/// Runs the model over every clip of a split and collects normalized scores.
///
/// Clips are processed in parallel; the result map is keyed by clip id so the
/// output is independent of completion order.
pub fn score_clips(
    model: &TrainedModel,
    model_id: &str,
    manifest: &DatasetManifest,
    split: Split,
    base_dir: &Path,
    params: &PipelineParams,
) -> Result<ExternalScoreSet> {
    let entries: Vec<_> = manifest.split(split).collect();
    let scored: Result<Vec<(String, ScoreVector)>> = entries
        .par_iter()
        .map(|entry| {
            let seq = load_feature_sequence(base_dir, &entry.clip_id, &entry.audio_path, params)?;
            let scores = score_sequence(model, &seq, params)
                .map_err(|e| e.for_clip(&entry.clip_id))?;
            Ok((entry.clip_id.clone(), scores.normalized()))
        })
        .collect();
    let mut set = ExternalScoreSet::new(model_id);
    for (clip_id, scores) in scored? {
        set.scores.insert(clip_id, scores);
    }
    Ok(set)
}
