//! Audio-channel emotion classification toolkit.
//!
//! The pipeline goes end to end from raw WAV files to confusion matrices:
//!
//! 1. [`ingest`] — decode PCM WAV into a canonical mono stream, parse dataset
//!    manifests and per-model score files.
//! 2. [`stfeat`] — frame the signal into 100 ms windows with 50% overlap and
//!    compute a 34-dimensional short-term feature vector per frame.
//! 3. [`seqmap`] — sequence-length padding, holistic functional summaries and
//!    34×34 image-like map sequences built from the feature matrix.
//! 4. [`models`] — desk-scale classifiers over the three representations:
//!    one-vs-rest linear SVM, and an LSTM consuming either raw feature
//!    sequences or flattened map tiles.
//! 5. [`fusion`] — weighted decision fusion with exhaustive simplex grid
//!    search for the model weights.
//! 6. [`eval`] — 7×7 confusion matrices, overall accuracy and the unweighted
//!    average of per-class recalls.
//!
//! [`synth`] generates a labeled synthetic tone corpus so the whole chain can
//! be exercised without any external dataset.

pub mod error;
pub mod eval;
pub mod fusion;
pub mod ingest;
pub mod models;
pub mod seqmap;
pub mod stfeat;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{AudioClip, DatasetManifest, EmotionLabel, ExternalScoreSet, Split};
pub use models::ScoreVector;

/// Number of emotion classes (fixed AN..SU ordering).
pub const NUM_CLASSES: usize = 7;

/// Number of short-term features per frame.
pub const FEATURE_DIM: usize = 34;

/// Canonical internal sample rate; every clip is resampled to this on ingest.
pub const CANONICAL_SAMPLE_RATE: u32 = 16_000;
