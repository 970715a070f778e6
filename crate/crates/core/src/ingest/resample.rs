//! Linear-interpolation resampling to the canonical rate.

use super::AudioClip;
use crate::error::{Error, Result};

/// Resamples a clip to `target_rate` by linear interpolation.
///
/// Identity (bitwise) when the rates already match. The output spans the same
/// time range as the input, so the duration moves by less than a millisecond.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if target_rate == 0 {
        return Err(Error::Precondition(format!(
            "clip {:?}: target_rate must be positive",
            clip.clip_id
        )));
    }
    if target_rate == clip.sample_rate {
        return Ok(clip.clone());
    }
    if clip.samples.is_empty() {
        return Ok(AudioClip {
            clip_id: clip.clip_id.clone(),
            samples: Vec::new(),
            sample_rate: target_rate,
        });
    }

    let src = &clip.samples;
    let ratio = f64::from(clip.sample_rate) / f64::from(target_rate);
    // Last output index whose source position still lies inside the input.
    let out_len = ((src.len() - 1) as f64 / ratio).floor() as usize + 1;
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let t = j as f64 * ratio;
        let lo = t.floor() as usize;
        let frac = t - lo as f64;
        let v = if frac == 0.0 || lo + 1 >= src.len() {
            src[lo]
        } else {
            src[lo] + frac * (src[lo + 1] - src[lo])
        };
        out.push(v);
    }

    AudioClip::new(clip.clip_id.clone(), out, target_rate)
}
