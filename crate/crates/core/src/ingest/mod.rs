//! Decoding raw audio into a canonical mono sample stream and parsing the
//! two CSV interchange formats (dataset manifests, per-model score files).

mod manifest;
mod resample;
mod scores;
mod wav;

pub use manifest::{parse_manifest, write_manifest};
pub use resample::resample;
pub use scores::{parse_scores, write_scores};
pub use wav::decode_wav;

use crate::error::{Error, Result};
use crate::models::ScoreVector;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// One of the seven emotion classes, in the fixed table order AN..SU.
///
/// The integer encoding 0..6 matches the row/column order of every confusion
/// matrix produced by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum EmotionLabel {
    Anger = 0,
    Disgust = 1,
    Fear = 2,
    Happiness = 3,
    Neutral = 4,
    Sadness = 5,
    Surprise = 6,
}

impl EmotionLabel {
    /// All labels in encoding order.
    pub const ALL: [EmotionLabel; 7] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Happiness,
        EmotionLabel::Neutral,
        EmotionLabel::Sadness,
        EmotionLabel::Surprise,
    ];

    /// Fixed integer encoding (0..6).
    pub fn index(self) -> usize {
        self as usize
    }

    /// Inverse of [`EmotionLabel::index`].
    pub fn from_index(idx: usize) -> Option<EmotionLabel> {
        Self::ALL.get(idx).copied()
    }

    /// Two-letter code used in CSV headers and confusion tables.
    pub fn code(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "AN",
            EmotionLabel::Disgust => "DI",
            EmotionLabel::Fear => "FE",
            EmotionLabel::Happiness => "HA",
            EmotionLabel::Neutral => "NE",
            EmotionLabel::Sadness => "SA",
            EmotionLabel::Surprise => "SU",
        }
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    /// Parses the two-letter code or the full class name, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AN" | "ANGER" => Ok(EmotionLabel::Anger),
            "DI" | "DISGUST" => Ok(EmotionLabel::Disgust),
            "FE" | "FEAR" => Ok(EmotionLabel::Fear),
            "HA" | "HAPPINESS" => Ok(EmotionLabel::Happiness),
            "NE" | "NEUTRAL" => Ok(EmotionLabel::Neutral),
            "SA" | "SAD" | "SADNESS" => Ok(EmotionLabel::Sadness),
            "SU" | "SURPRISE" => Ok(EmotionLabel::Surprise),
            _ => Err(Error::UnknownLabel {
                token: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Dataset partition a clip belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            _ => Err(Error::UnknownSplit {
                token: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A decoded clip: mono samples in [-1, 1] at a known rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub clip_id: String,
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    /// Builds a clip, checking the rate and amplitude invariants.
    pub fn new(clip_id: impl Into<String>, samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let clip_id = clip_id.into();
        if sample_rate == 0 {
            return Err(Error::Precondition(format!(
                "clip {clip_id:?}: sample_rate must be positive"
            )));
        }
        if samples.iter().any(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::NonFinite {
                context: format!("samples of clip {clip_id:?}"),
            });
        }
        Ok(AudioClip {
            clip_id,
            samples,
            sample_rate,
        })
    }

    /// Clip duration in whole milliseconds: `floor(1000 * len / rate)`.
    pub fn duration_ms(&self) -> u64 {
        1000 * self.samples.len() as u64 / self.sample_rate as u64
    }
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub clip_id: String,
    pub split: Split,
    /// Absent only for test rows.
    pub label: Option<EmotionLabel>,
    pub audio_path: String,
}

/// Parsed dataset manifest; clip ids are unique, manifest order is preserved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Entries of one split, in manifest order.
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Ground-truth labels of one split (clip_id -> label).
    pub fn labels(&self, split: Split) -> BTreeMap<String, EmotionLabel> {
        self.split(split)
            .filter_map(|e| e.label.map(|l| (e.clip_id.clone(), l)))
            .collect()
    }
}

/// Per-model class scores for a set of clips, as ingested or emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalScoreSet {
    pub model_id: String,
    pub scores: BTreeMap<String, ScoreVector>,
}

impl ExternalScoreSet {
    pub fn new(model_id: impl Into<String>) -> Self {
        ExternalScoreSet {
            model_id: model_id.into(),
            scores: BTreeMap::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_encoding_matches_table_order() {
        let codes: Vec<&str> = EmotionLabel::ALL.iter().map(|l| l.code()).collect();
        assert_eq!(codes, ["AN", "DI", "FE", "HA", "NE", "SA", "SU"]);
        for (i, l) in EmotionLabel::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(EmotionLabel::from_index(i), Some(*l));
        }
    }

    #[test]
    fn label_parses_codes_and_names_case_insensitively() {
        assert_eq!("ha".parse::<EmotionLabel>().unwrap(), EmotionLabel::Happiness);
        assert_eq!("Sad".parse::<EmotionLabel>().unwrap(), EmotionLabel::Sadness);
        assert_eq!("SURPRISE".parse::<EmotionLabel>().unwrap(), EmotionLabel::Surprise);
        assert!(matches!(
            "joy".parse::<EmotionLabel>(),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn duration_is_floor_of_sample_count_over_rate() {
        let clip = AudioClip::new("c", vec![0.0; 16_000], 16_000).unwrap();
        assert_eq!(clip.duration_ms(), 1000);
        let clip = AudioClip::new("c", vec![0.0; 2384], 16_000).unwrap();
        assert_eq!(clip.duration_ms(), 149);
    }

    #[test]
    fn clip_rejects_out_of_range_samples() {
        assert!(AudioClip::new("c", vec![1.5], 16_000).is_err());
        assert!(AudioClip::new("c", vec![f64::NAN], 16_000).is_err());
        assert!(AudioClip::new("c", vec![0.0], 0).is_err());
    }
}
