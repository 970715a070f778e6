//! Statistical functionals applied per feature dimension to form the
//! holistic clip vector.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// The supported functional bank.
///
/// Percentiles use linear interpolation between closest ranks; moments are
/// population moments; skewness and kurtosis fall back to 0 for constant
/// input, and kurtosis is excess kurtosis (normal distribution → 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Functional {
    Mean,
    Std,
    Min,
    Max,
    Median,
    P25,
    P75,
    Range,
    Skewness,
    Kurtosis,
}

impl Functional {
    /// All ten functionals: the default holistic bank (10 × 34 = 340 values).
    pub const ALL: [Functional; 10] = [
        Functional::Mean,
        Functional::Std,
        Functional::Min,
        Functional::Max,
        Functional::Median,
        Functional::P25,
        Functional::P75,
        Functional::Range,
        Functional::Skewness,
        Functional::Kurtosis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functional::Mean => "mean",
            Functional::Std => "std",
            Functional::Min => "min",
            Functional::Max => "max",
            Functional::Median => "median",
            Functional::P25 => "p25",
            Functional::P75 => "p75",
            Functional::Range => "range",
            Functional::Skewness => "skewness",
            Functional::Kurtosis => "kurtosis",
        }
    }

    /// Stable id used by the model container.
    pub fn id(self) -> u8 {
        Self::ALL.iter().position(|f| *f == self).unwrap() as u8
    }

    pub fn from_id(id: u8) -> Option<Functional> {
        Self::ALL.get(id as usize).copied()
    }

    /// Applies the functional to one dimension's samples (nonempty).
    pub fn apply(self, xs: &[f64]) -> f64 {
        debug_assert!(!xs.is_empty());
        match self {
            Functional::Mean => mean(xs),
            Functional::Std => central_moment(xs, 2).sqrt(),
            Functional::Min => xs.iter().copied().fold(f64::INFINITY, f64::min),
            Functional::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Functional::Median => percentile(xs, 0.50),
            Functional::P25 => percentile(xs, 0.25),
            Functional::P75 => percentile(xs, 0.75),
            Functional::Range => self::range(xs),
            Functional::Skewness => {
                let m2 = central_moment(xs, 2);
                if m2 <= 0.0 {
                    0.0
                } else {
                    central_moment(xs, 3) / m2.powf(1.5)
                }
            }
            Functional::Kurtosis => {
                let m2 = central_moment(xs, 2);
                if m2 <= 0.0 {
                    0.0
                } else {
                    central_moment(xs, 4) / (m2 * m2) - 3.0
                }
            }
        }
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Functional::ALL
            .iter()
            .find(|f| f.name() == s.trim().to_ascii_lowercase())
            .copied()
            .ok_or_else(|| Error::UnknownFunctional {
                name: s.to_string(),
            })
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn central_moment(xs: &[f64], order: u32) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(order as i32)).sum::<f64>() / xs.len() as f64
}

fn range(xs: &[f64]) -> f64 {
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max - min
}

/// Percentile with linear interpolation between closest ranks.
fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
