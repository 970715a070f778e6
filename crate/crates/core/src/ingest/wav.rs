//! PCM WAV decoding to the canonical mono stream.

use super::AudioClip;
use crate::error::{Error, Result};
use std::path::Path;

/// Decodes a PCM WAV file (8/16/24-bit integer or 32-bit float, 1 or 2
/// channels) into a mono [`AudioClip`].
///
/// Stereo is downmixed by per-sample channel averaging. Integer samples are
/// scaled to [-1, 1] by the type's maximum magnitude (32768 for 16-bit).
/// The clip id defaults to the file stem.
pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(&path_str, e))?;
    let spec = reader.spec();

    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::UnsupportedWav {
            path: path_str,
            detail: format!("{} channels (only mono and stereo supported)", spec.channels),
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24)) => {
            // Maximum magnitude of the signed type: 2^(bits-1).
            let scale = f64::from(1u32 << (bits - 1));
            let mut out = Vec::with_capacity(reader.len() as usize);
            for s in reader.into_samples::<i32>() {
                let s = s.map_err(|e| map_hound(&path_str, e))?;
                out.push(f64::from(s) / scale);
            }
            out
        }
        (hound::SampleFormat::Float, 32) => {
            let mut out = Vec::with_capacity(reader.len() as usize);
            for s in reader.into_samples::<f32>() {
                let s = s.map_err(|e| map_hound(&path_str, e))?;
                if !s.is_finite() {
                    return Err(Error::NonFinite {
                        context: format!("float samples of {path_str}"),
                    });
                }
                out.push(f64::from(s).clamp(-1.0, 1.0));
            }
            out
        }
        (fmt, bits) => {
            return Err(Error::UnsupportedWav {
                path: path_str,
                detail: format!("{bits}-bit {fmt:?} PCM"),
            });
        }
    };

    let samples: Vec<f64> = if spec.channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|lr| (lr[0] + lr[1]) / 2.0)
            .collect()
    } else {
        interleaved
    };

    if samples.is_empty() {
        return Err(Error::EmptyAudio { path: path_str });
    }

    let clip_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(path_str);
    AudioClip::new(clip_id, samples, spec.sample_rate)
}

fn map_hound(path: &str, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::Unsupported => Error::UnsupportedWav {
            path: path.to_string(),
            detail: "unsupported codec".to_string(),
        },
        other => Error::MalformedWav {
            path: path.to_string(),
            detail: other.to_string(),
        },
    }
}
