//! Short-term acoustic features: 100 ms frames with 50% overlap, 34 features
//! per frame.
//!
//! Feature layout (fixed):
//!
//! | index  | feature            |
//! |--------|--------------------|
//! | 0      | zero-crossing rate |
//! | 1      | energy             |
//! | 2      | energy entropy     |
//! | 3      | spectral centroid  |
//! | 4      | spectral spread    |
//! | 5      | spectral entropy   |
//! | 6      | spectral flux      |
//! | 7      | spectral roll-off  |
//! | 8..20  | MFCC 1-13          |
//! | 21..32 | chroma classes 1-12|
//! | 33     | chroma deviation   |

mod dump;
mod extractor;

pub use dump::{read_features_bin, write_features_bin, write_features_csv};
pub use extractor::FeatureExtractor;

use crate::error::{Error, Result};
use crate::ingest::AudioClip;
use crate::FEATURE_DIM;

/// Default analysis window length in milliseconds.
pub const DEFAULT_WINDOW_MS: u32 = 100;
/// Default hop between windows in milliseconds (50% overlap).
pub const DEFAULT_STEP_MS: u32 = 50;

/// Feature indices by name, matching the table in the module docs.
pub mod idx {
    pub const ZCR: usize = 0;
    pub const ENERGY: usize = 1;
    pub const ENERGY_ENTROPY: usize = 2;
    pub const SPECTRAL_CENTROID: usize = 3;
    pub const SPECTRAL_SPREAD: usize = 4;
    pub const SPECTRAL_ENTROPY: usize = 5;
    pub const SPECTRAL_FLUX: usize = 6;
    pub const SPECTRAL_ROLLOFF: usize = 7;
    pub const MFCC_FIRST: usize = 8;
    pub const MFCC_COUNT: usize = 13;
    pub const CHROMA_FIRST: usize = 21;
    pub const CHROMA_COUNT: usize = 12;
    pub const CHROMA_DEVIATION: usize = 33;
}

/// One analysis window of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    /// Position of the frame within the clip (0-based).
    pub index: usize,
    /// Start time: `index * step_ms`.
    pub start_ms: u64,
}

/// The 34-dimensional descriptor of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTermFeatureVector {
    pub values: [f64; FEATURE_DIM],
}

impl ShortTermFeatureVector {
    pub fn zcr(&self) -> f64 {
        self.values[idx::ZCR]
    }
    pub fn energy(&self) -> f64 {
        self.values[idx::ENERGY]
    }
    pub fn mfcc(&self) -> &[f64] {
        &self.values[idx::MFCC_FIRST..idx::MFCC_FIRST + idx::MFCC_COUNT]
    }
    pub fn chroma(&self) -> &[f64] {
        &self.values[idx::CHROMA_FIRST..idx::CHROMA_FIRST + idx::CHROMA_COUNT]
    }
}

/// Ordered per-frame feature vectors of one clip.
///
/// `original_length` stays at the pre-padding frame count, so downstream
/// summaries can ignore replicated tail vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub clip_id: String,
    pub vectors: Vec<ShortTermFeatureVector>,
    pub original_length: usize,
}

impl FeatureSequence {
    /// Wraps freshly extracted vectors (no padding applied yet).
    pub fn new(clip_id: impl Into<String>, vectors: Vec<ShortTermFeatureVector>) -> Self {
        let original_length = vectors.len();
        FeatureSequence {
            clip_id: clip_id.into(),
            vectors,
            original_length,
        }
    }

    /// The vectors before any padding.
    pub fn unpadded(&self) -> &[ShortTermFeatureVector] {
        &self.vectors[..self.original_length.min(self.vectors.len())]
    }
}

/// Cuts the clip into fixed-length windows.
///
/// Frame count is `floor((duration_ms - step_ms) / step_ms)` at the default
/// 100/50 ms geometry; trailing samples that do not fill a whole window are
/// dropped. Fails with the clip id when the clip is shorter than one window.
pub fn frame_signal(clip: &AudioClip, window_ms: u32, step_ms: u32) -> Result<Vec<Frame>> {
    if step_ms == 0 || window_ms < step_ms {
        return Err(Error::Precondition(format!(
            "invalid framing: window {window_ms} ms, step {step_ms} ms"
        )));
    }
    let rate = clip.sample_rate as u64;
    let window_len = (u64::from(window_ms) * rate / 1000) as usize;
    let step_len = (u64::from(step_ms) * rate / 1000) as usize;
    if window_len < 2 || step_len == 0 {
        return Err(Error::Precondition(format!(
            "window of {window_ms} ms at {rate} Hz is too short to analyze"
        )));
    }
    if clip.samples.len() < window_len {
        return Err(Error::ClipTooShort {
            clip_id: clip.clip_id.clone(),
            duration_ms: clip.duration_ms(),
            window_ms,
        });
    }
    let n = (clip.samples.len() - window_len) / step_len + 1;
    let mut frames = Vec::with_capacity(n);
    for k in 0..n {
        let start = k * step_len;
        frames.push(Frame {
            samples: clip.samples[start..start + window_len].to_vec(),
            index: k,
            start_ms: k as u64 * u64::from(step_ms),
        });
    }
    Ok(frames)
}

/// Extracts the full feature sequence of a clip, handing each frame's
/// magnitude spectrum to the next frame's flux computation.
pub fn featurize_clip(clip: &AudioClip, window_ms: u32, step_ms: u32) -> Result<FeatureSequence> {
    let frames = frame_signal(clip, window_ms, step_ms)?;
    let extractor = FeatureExtractor::new(clip.sample_rate, frames[0].samples.len());
    let mut vectors = Vec::with_capacity(frames.len());
    let mut prev_spectrum: Option<Vec<f64>> = None;
    for frame in &frames {
        let (vector, spectrum) = extractor.extract(frame, prev_spectrum.as_deref())?;
        vectors.push(vector);
        prev_spectrum = Some(spectrum);
    }
    Ok(FeatureSequence::new(clip.clip_id.clone(), vectors))
}
