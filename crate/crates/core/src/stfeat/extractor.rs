//! Per-frame computation of the 34 short-term features.

use super::{idx, Frame, ShortTermFeatureVector};
use crate::error::{Error, Result};
use crate::FEATURE_DIM;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const NUM_MEL_FILTERS: usize = 26;
const NUM_SUBFRAMES: usize = 10;
const NUM_SPECTRAL_BANDS: usize = 10;
const ROLLOFF_FRACTION: f64 = 0.90;
const LOG_ENERGY_FLOOR: f64 = 1e-10;
/// Bins below this frequency carry no usable pitch information.
const CHROMA_MIN_HZ: f64 = 10.0;

/// Computes the 34 short-term features over frames of one fixed length.
///
/// Construction precomputes the FFT plan, the mel filterbank, the orthonormal
/// DCT-II matrix and the bin-to-pitch-class map, so per-frame extraction only
/// does the transform and a handful of weighted sums. The frame is analyzed
/// as-is (rectangular window), FFT length equals frame length, and only the
/// magnitudes of the positive-frequency bins are kept.
pub struct FeatureExtractor {
    sample_rate: u32,
    frame_len: usize,
    num_bins: usize,
    fft: Arc<dyn Fft<f64>>,
    /// Per filter: (bin, weight) pairs with nonzero triangular weight.
    mel_bank: Vec<Vec<(usize, f64)>>,
    /// 13 x 26 orthonormal DCT-II rows.
    dct_rows: Vec<Vec<f64>>,
    /// Pitch class per bin; `None` below the chroma cutoff.
    chroma_class: Vec<Option<usize>>,
}

impl FeatureExtractor {
    pub fn new(sample_rate: u32, frame_len: usize) -> Self {
        assert!(frame_len >= 2, "frame length must be at least 2");
        assert!(sample_rate > 0, "sample rate must be positive");
        let num_bins = frame_len / 2;
        let fft = FftPlanner::new().plan_fft_forward(frame_len);
        let bin_hz = f64::from(sample_rate) / frame_len as f64;
        let nyquist = f64::from(sample_rate) / 2.0;

        FeatureExtractor {
            sample_rate,
            frame_len,
            num_bins,
            fft,
            mel_bank: build_mel_bank(NUM_MEL_FILTERS, num_bins, bin_hz, nyquist),
            dct_rows: build_dct_rows(idx::MFCC_COUNT, NUM_MEL_FILTERS),
            chroma_class: (0..num_bins)
                .map(|i| {
                    let f = i as f64 * bin_hz;
                    (f >= CHROMA_MIN_HZ)
                        .then(|| ((12.0 * (f / 440.0).log2()).round() as i64).rem_euclid(12) as usize)
                })
                .collect(),
        }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    /// Magnitude spectrum of the positive-frequency bins (0..frame_len/2).
    pub fn magnitude_spectrum(&self, samples: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
        self.fft.process(&mut buf);
        buf[..self.num_bins].iter().map(|c| c.norm()).collect()
    }

    /// Computes the feature vector of one frame.
    ///
    /// `prev_spectrum` is the magnitude spectrum returned for the previous
    /// frame; pass `None` for the first frame, whose flux is then computed
    /// against its own spectrum and is exactly zero. Returns the frame's
    /// spectrum for the next call.
    pub fn extract(
        &self,
        frame: &Frame,
        prev_spectrum: Option<&[f64]>,
    ) -> Result<(ShortTermFeatureVector, Vec<f64>)> {
        let samples = &frame.samples;
        if samples.len() != self.frame_len {
            return Err(Error::DimensionMismatch {
                context: "frame length".to_string(),
                expected: self.frame_len,
                actual: samples.len(),
            });
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("frame {} samples", frame.index),
            });
        }

        let spectrum = self.magnitude_spectrum(samples);
        let mut v = [0.0; FEATURE_DIM];

        v[idx::ZCR] = zero_crossing_rate(samples);
        v[idx::ENERGY] = samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64;
        v[idx::ENERGY_ENTROPY] = energy_entropy(samples);

        let (centroid, spread) = centroid_and_spread(&spectrum);
        v[idx::SPECTRAL_CENTROID] = centroid;
        v[idx::SPECTRAL_SPREAD] = spread;
        v[idx::SPECTRAL_ENTROPY] = spectral_entropy(&spectrum);
        v[idx::SPECTRAL_FLUX] = spectral_flux(&spectrum, prev_spectrum.unwrap_or(&spectrum));
        v[idx::SPECTRAL_ROLLOFF] = spectral_rolloff(&spectrum);

        let mfcc = self.mfcc(&spectrum);
        v[idx::MFCC_FIRST..idx::MFCC_FIRST + idx::MFCC_COUNT].copy_from_slice(&mfcc);

        let chroma = self.chroma(&spectrum);
        v[idx::CHROMA_FIRST..idx::CHROMA_FIRST + idx::CHROMA_COUNT].copy_from_slice(&chroma);
        v[idx::CHROMA_DEVIATION] = population_std(&chroma);

        Ok((ShortTermFeatureVector { values: v }, spectrum))
    }

    fn mfcc(&self, spectrum: &[f64]) -> [f64; idx::MFCC_COUNT] {
        let log_energies: Vec<f64> = self
            .mel_bank
            .iter()
            .map(|filter| {
                let e: f64 = filter.iter().map(|&(bin, w)| w * spectrum[bin]).sum();
                e.max(LOG_ENERGY_FLOOR).ln()
            })
            .collect();
        let mut out = [0.0; idx::MFCC_COUNT];
        for (k, row) in self.dct_rows.iter().enumerate() {
            out[k] = row
                .iter()
                .zip(&log_energies)
                .map(|(c, e)| c * e)
                .sum::<f64>();
        }
        out
    }

    fn chroma(&self, spectrum: &[f64]) -> [f64; idx::CHROMA_COUNT] {
        let total: f64 = spectrum.iter().map(|x| x * x).sum();
        let mut out = [0.0; idx::CHROMA_COUNT];
        if total <= 0.0 {
            return out;
        }
        for (bin, class) in self.chroma_class.iter().enumerate() {
            if let Some(c) = class {
                out[*c] += spectrum[bin] * spectrum[bin];
            }
        }
        for v in &mut out {
            *v /= total;
        }
        out
    }
}

/// Fraction of consecutive sample pairs with a strict sign change.
fn zero_crossing_rate(samples: &[f64]) -> f64 {
    let crossings = samples
        .windows(2)
        .filter(|pair| pair[0] * pair[1] < 0.0)
        .count();
    crossings as f64 / (samples.len() - 1) as f64
}

/// Entropy of the energy distribution over 10 equal sub-frames.
fn energy_entropy(samples: &[f64]) -> f64 {
    let sub_count = NUM_SUBFRAMES.min(samples.len());
    let sub_len = samples.len() / sub_count;
    let energies: Vec<f64> = (0..sub_count)
        .map(|j| {
            samples[j * sub_len..(j + 1) * sub_len]
                .iter()
                .map(|s| s * s)
                .sum()
        })
        .collect();
    entropy_of(&energies)
}

/// Shannon entropy (base 2) of a nonnegative weight vector; 0 for zero total.
fn entropy_of(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -weights
        .iter()
        .map(|&w| w / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

/// Nyquist-normalized spectral centroid and spread.
///
/// A zero spectrum yields (0.5, 0): the centroid is pinned mid-band so it
/// stays inside [0, 1].
fn centroid_and_spread(spectrum: &[f64]) -> (f64, f64) {
    let total: f64 = spectrum.iter().sum();
    if total <= 0.0 {
        return (0.5, 0.0);
    }
    let k = spectrum.len() as f64;
    // bin i sits at normalized frequency i / num_bins of Nyquist
    let centroid: f64 = spectrum
        .iter()
        .enumerate()
        .map(|(i, &x)| (i as f64 / k) * x / total)
        .sum();
    let variance: f64 = spectrum
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let d = i as f64 / k - centroid;
            d * d * x / total
        })
        .sum();
    (centroid, variance.sqrt())
}

/// Entropy of spectral energy over 10 equal bands.
fn spectral_entropy(spectrum: &[f64]) -> f64 {
    let band_count = NUM_SPECTRAL_BANDS.min(spectrum.len());
    let band_len = spectrum.len() / band_count;
    let energies: Vec<f64> = (0..band_count)
        .map(|b| {
            spectrum[b * band_len..(b + 1) * band_len]
                .iter()
                .map(|x| x * x)
                .sum()
        })
        .collect();
    entropy_of(&energies)
}

/// Squared distance between the sum-normalized spectra of two frames.
fn spectral_flux(spectrum: &[f64], prev: &[f64]) -> f64 {
    let sum: f64 = spectrum.iter().sum();
    let prev_sum: f64 = prev.iter().sum();
    let norm = |x: f64, s: f64| if s > 0.0 { x / s } else { 0.0 };
    spectrum
        .iter()
        .zip(prev)
        .map(|(&a, &b)| {
            let d = norm(a, sum) - norm(b, prev_sum);
            d * d
        })
        .sum()
}

/// Smallest bin index accumulating 90% of spectral energy, over bin count.
fn spectral_rolloff(spectrum: &[f64]) -> f64 {
    let total: f64 = spectrum.iter().map(|x| x * x).sum();
    let threshold = ROLLOFF_FRACTION * total;
    let mut cumulative = 0.0;
    for (i, &x) in spectrum.iter().enumerate() {
        cumulative += x * x;
        if cumulative >= threshold {
            return i as f64 / spectrum.len() as f64;
        }
    }
    0.0
}

/// Population standard deviation.
fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// HTK mel scale.
fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale over 0..Nyquist,
/// stored sparsely as (bin, weight) pairs.
fn build_mel_bank(
    num_filters: usize,
    num_bins: usize,
    bin_hz: f64,
    nyquist: f64,
) -> Vec<Vec<(usize, f64)>> {
    let mel_max = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..num_filters + 2)
        .map(|k| mel_to_hz(mel_max * k as f64 / (num_filters + 1) as f64))
        .collect();
    (0..num_filters)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let mut filter = Vec::new();
            for bin in 0..num_bins {
                let f = bin as f64 * bin_hz;
                let w = if f >= lo && f <= mid && mid > lo {
                    (f - lo) / (mid - lo)
                } else if f > mid && f <= hi && hi > mid {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                if w > 0.0 {
                    filter.push((bin, w));
                }
            }
            filter
        })
        .collect()
}

/// Rows 0..count of the orthonormal DCT-II over `len` points.
fn build_dct_rows(count: usize, len: usize) -> Vec<Vec<f64>> {
    let n = len as f64;
    (0..count)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / n).sqrt()
            } else {
                (2.0 / n).sqrt()
            };
            (0..len)
                .map(|j| {
                    scale
                        * (std::f64::consts::PI * k as f64 * (2.0 * j as f64 + 1.0) / (2.0 * n))
                            .cos()
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_of(samples: Vec<f64>) -> Frame {
        Frame {
            samples,
            index: 0,
            start_ms: 0,
        }
    }

    fn extract_one(samples: Vec<f64>, rate: u32) -> ShortTermFeatureVector {
        let ex = FeatureExtractor::new(rate, samples.len());
        ex.extract(&frame_of(samples), None).unwrap().0
    }

    fn sine_frame(freq: f64, rate: u32, len: usize, amp: f64) -> Vec<f64> {
        (0..len)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / f64::from(rate)).sin())
            .collect()
    }

    #[test]
    fn constant_frame_has_zero_zcr() {
        let v = extract_one(vec![0.3; 1600], 16_000);
        assert_eq!(v.zcr(), 0.0);
    }

    #[test]
    fn alternating_frame_has_zcr_one() {
        let samples: Vec<f64> = (0..1600).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let v = extract_one(samples, 16_000);
        assert_eq!(v.zcr(), 1.0);
    }

    #[test]
    fn zero_frame_is_all_finite_with_stated_guards() {
        let v = extract_one(vec![0.0; 1600], 16_000);
        assert_eq!(v.energy(), 0.0);
        assert_eq!(v.values[idx::ENERGY_ENTROPY], 0.0);
        assert_eq!(v.values[idx::SPECTRAL_CENTROID], 0.5);
        assert_eq!(v.values[idx::SPECTRAL_SPREAD], 0.0);
        assert_eq!(v.values[idx::SPECTRAL_FLUX], 0.0);
        assert_eq!(v.values[idx::SPECTRAL_ROLLOFF], 0.0);
        assert!(v.chroma().iter().all(|&c| c == 0.0));
        assert!(v.values.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn pure_tone_centroid_sits_at_its_frequency() {
        for freq in [500.0, 1000.0, 2000.0] {
            let v = extract_one(sine_frame(freq, 16_000, 1600, 0.8), 16_000);
            let expected = freq / 8000.0;
            assert!(
                (v.values[idx::SPECTRAL_CENTROID] - expected).abs() < 0.01,
                "freq {freq}: centroid {} vs {expected}",
                v.values[idx::SPECTRAL_CENTROID]
            );
        }
    }

    #[test]
    fn identical_consecutive_frames_have_zero_flux() {
        let ex = FeatureExtractor::new(16_000, 1600);
        let samples = sine_frame(700.0, 16_000, 1600, 0.5);
        let (_, spec) = ex.extract(&frame_of(samples.clone()), None).unwrap();
        let (v, _) = ex.extract(&frame_of(samples), Some(&spec)).unwrap();
        assert_eq!(v.values[idx::SPECTRAL_FLUX], 0.0);
    }

    #[test]
    fn first_frame_flux_is_zero() {
        let v = extract_one(sine_frame(440.0, 16_000, 1600, 0.9), 16_000);
        assert_eq!(v.values[idx::SPECTRAL_FLUX], 0.0);
    }

    #[test]
    fn tone_at_440_concentrates_chroma_in_one_class() {
        let v = extract_one(sine_frame(440.0, 16_000, 1600, 0.8), 16_000);
        let chroma = v.chroma();
        // class 0 is the A pitch class under round(12 log2(f/440)) mod 12
        let best = chroma
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(best, 0);
        assert!(chroma[0] > 0.5, "chroma {chroma:?}");
    }

    #[test]
    fn identical_frames_yield_bitwise_identical_vectors() {
        let samples = sine_frame(977.0, 16_000, 1600, 0.63);
        let a = extract_one(samples.clone(), 16_000);
        let b = extract_one(samples, 16_000);
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let ex = FeatureExtractor::new(16_000, 4);
        let err = ex.extract(&frame_of(vec![0.0, f64::NAN, 0.0, 0.0]), None);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn rejects_wrong_frame_length() {
        let ex = FeatureExtractor::new(16_000, 1600);
        let err = ex.extract(&frame_of(vec![0.0; 100]), None);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dct_rows_are_orthonormal() {
        let rows = build_dct_rows(13, 26);
        for (i, a) in rows.iter().enumerate() {
            for (j, b) in rows.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12, "rows {i},{j}: {dot}");
            }
        }
    }

    #[test]
    fn mel_bank_covers_every_filter_with_weights_in_unit_range() {
        let bank = build_mel_bank(26, 800, 10.0, 8000.0);
        assert_eq!(bank.len(), 26);
        for filter in &bank {
            assert!(!filter.is_empty());
            assert!(filter.iter().all(|&(_, w)| w > 0.0 && w <= 1.0));
        }
    }

    // fuzz: every invariant bound over 10 000 random frames
    #[test]
    fn feature_bounds_hold_on_random_frames() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_f00d);
        let ex = FeatureExtractor::new(16_000, 64);
        let mut prev: Option<Vec<f64>> = None;
        for _ in 0..10_000 {
            let samples: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (v, spec) = ex.extract(&frame_of(samples), prev.as_deref()).unwrap();
            assert!(v.values.iter().all(|x| x.is_finite()));
            assert!((0.0..=1.0).contains(&v.zcr()));
            assert!(v.energy() >= 0.0);
            assert!((0.0..=10f64.log2() + 1e-12).contains(&v.values[idx::ENERGY_ENTROPY]));
            assert!((0.0..=1.0).contains(&v.values[idx::SPECTRAL_CENTROID]));
            assert!((0.0..=1.0).contains(&v.values[idx::SPECTRAL_SPREAD]));
            assert!((0.0..=10f64.log2() + 1e-12).contains(&v.values[idx::SPECTRAL_ENTROPY]));
            assert!(v.values[idx::SPECTRAL_FLUX] >= 0.0);
            assert!((0.0..=1.0).contains(&v.values[idx::SPECTRAL_ROLLOFF]));
            assert!(v.chroma().iter().all(|&c| c >= 0.0));
            assert!(v.values[idx::CHROMA_DEVIATION] >= 0.0);
            prev = Some(spec);
        }
    }

    // dyadic gain keeps every ratio-normalized feature exactly in place
    #[test]
    fn amplitude_scaling_moves_only_energy_and_mfcc() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let ex = FeatureExtractor::new(16_000, 160);
        for &alpha in &[0.5, 2.0, 8.0] {
            for _ in 0..50 {
                let samples: Vec<f64> = (0..160).map(|_| rng.gen_range(-0.1..0.1)).collect();
                let scaled: Vec<f64> = samples.iter().map(|s| s * alpha).collect();
                let (a, _) = ex.extract(&frame_of(samples), None).unwrap();
                let (b, _) = ex.extract(&frame_of(scaled), None).unwrap();
                assert!((b.energy() - alpha * alpha * a.energy()).abs() <= 1e-9 * b.energy().abs().max(1.0));
                for i in [
                    idx::ZCR,
                    idx::ENERGY_ENTROPY,
                    idx::SPECTRAL_CENTROID,
                    idx::SPECTRAL_SPREAD,
                    idx::SPECTRAL_ENTROPY,
                    idx::SPECTRAL_ROLLOFF,
                    idx::CHROMA_DEVIATION,
                ] {
                    assert!(
                        (a.values[i] - b.values[i]).abs() < 1e-9,
                        "feature {i} moved under gain {alpha}"
                    );
                }
                for (x, y) in a.chroma().iter().zip(b.chroma()) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
