//! Gaussian kernel density estimates for overlay and filled-curve stripes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points in the display grid of every stripe curve.
pub const DISPLAY_POINTS: usize = 512;

/// Kernels further than this many bandwidths from a grid point are ignored;
/// `exp(-50)` is far below f64 resolution of any density sum.
const CUTOFF_BANDWIDTHS: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("empty input")]
    EmptyInput,
    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, DensityError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    #[serde(rename = "h")]
    pub bandwidth: f64,
}

impl DensityCurve {
    pub fn max_density(&self) -> f64 {
        self.ys.iter().copied().fold(0.0, f64::max)
    }

    /// Curve of zeros, used for rows without samples.
    pub fn flat(lo: f64, hi: f64, points: usize, bandwidth: f64) -> Self {
        Self {
            xs: grid(lo, hi, points),
            ys: vec![0.0; points],
            bandwidth,
        }
    }
}

/// Quantile by linear interpolation between order statistics
/// (`h = (n - 1) p`), on sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Silverman's rule of thumb, `0.9 min(s, IQR/1.34) n^(-1/5)`.
///
/// When only one of the two spread measures is zero the other is used; when
/// both are zero the bandwidth is `fallback_scale`.
pub fn silverman_bandwidth(samples: &[f64], fallback_scale: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(DensityError::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let s = std_dev(&sorted);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = match (s > 0.0, iqr > 0.0) {
        (true, true) => s.min(iqr / 1.34),
        (true, false) => s,
        (false, true) => iqr / 1.34,
        (false, false) => return Ok(fallback_scale),
    };
    Ok(0.9 * spread * (samples.len() as f64).powf(-0.2))
}

/// `points` equally spaced values over `[lo, hi]`, both ends exact.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    let mut xs: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    xs[points - 1] = hi;
    xs
}

/// Gaussian KDE evaluated on an even grid over `[lo, hi]`.
pub fn kde_curve(samples: &[f64], h: f64, lo: f64, hi: f64, points: usize) -> Result<DensityCurve> {
    if samples.is_empty() {
        return Err(DensityError::EmptyInput);
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(DensityError::InvalidBandwidth(h));
    }
    if !(lo < hi) || points < 2 {
        return Err(DensityError::InvalidGrid(format!(
            "need lo < hi and at least 2 points, got [{lo}, {hi}] with {points}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let xs = grid(lo, hi, points);
    let norm = 1.0 / (sorted.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let reach = CUTOFF_BANDWIDTHS * h;
    let ys = xs
        .par_iter()
        .map(|&x| {
            let start = sorted.partition_point(|&s| s < x - reach);
            let end = sorted.partition_point(|&s| s <= x + reach);
            let sum: f64 = sorted[start..end]
                .iter()
                .map(|&s| {
                    let u = (x - s) / h;
                    (-0.5 * u * u).exp()
                })
                .sum();
            sum * norm
        })
        .collect();
    Ok(DensityCurve { xs, ys, bandwidth: h })
}

/// Trapezoidal integral of a curve.
pub fn trapezoid(curve: &DensityCurve) -> f64 {
    curve
        .xs
        .windows(2)
        .zip(curve.ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
