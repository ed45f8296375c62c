//! Welch power spectral density and median frequency.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinError};

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    /// Segment length is the analysis window length divided by this.
    pub segment_divisor: usize,
    /// Fractional overlap between consecutive segments.
    pub overlap: f64,
    /// Hann taper when true, rectangular otherwise.
    pub hann: bool,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_divisor: 4,
            overlap: 0.5,
            hann: true,
        }
    }
}

/// One-sided PSD estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl Psd {
    pub fn bin_width(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }
}

/// Welch PSD of `x` using segments of `seg_len` samples. Each segment is
/// mean-removed and tapered; the result is in units^2 per hertz.
pub fn welch(x: &[f64], rate: f64, seg_len: usize, cfg: &WelchConfig) -> Result<Psd> {
    if seg_len < 2 || seg_len > x.len() {
        return Err(TwinError::invalid(
            "welch segment",
            format!("{seg_len} samples does not fit a {}-sample input", x.len()),
        ));
    }
    if !(0.0..1.0).contains(&cfg.overlap) {
        return Err(TwinError::invalid("welch overlap", "must be in [0, 1)"));
    }
    let hop = ((seg_len as f64 * (1.0 - cfg.overlap)).round() as usize).max(1);
    let taper: Vec<f64> = (0..seg_len)
        .map(|k| {
            if cfg.hann {
                0.5 - 0.5 * (2.0 * PI * k as f64 / seg_len as f64).cos()
            } else {
                1.0
            }
        })
        .collect();
    let taper_power: f64 = taper.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg_len);
    let n_bins = seg_len / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];
    let mut start = 0;
    while start + seg_len <= x.len() {
        let seg = &x[start..start + seg_len];
        let mean = seg.iter().sum::<f64>() / seg_len as f64;
        for (b, (&v, &w)) in buf.iter_mut().zip(seg.iter().zip(&taper)) {
            *b = Complex64::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (rate * taper_power * segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (seg_len.is_multiple_of(2) && k == seg_len / 2) { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    let freqs = (0..n_bins).map(|k| k as f64 * rate / seg_len as f64).collect();
    Ok(Psd { freqs, power })
}

/// Relative width of the level band used to detect a spectral gap at the
/// half-power point.
const HALF_POWER_BAND: f64 = 1e-3;

/// Frequency splitting the spectral power into equal halves.
///
/// The cumulative power is interpolated linearly between bins. When the
/// cumulative curve sits flat at one half over a gap (for instance two
/// separated tones of equal power) the midpoint of the gap is returned.
pub fn median_frequency(psd: &Psd) -> Option<f64> {
    let total: f64 = psd.power.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let half = 0.5 * total;
    let lo = crossing(psd, half * (1.0 - HALF_POWER_BAND))?;
    let hi = crossing(psd, half * (1.0 + HALF_POWER_BAND))?;
    Some(0.5 * (lo + hi))
}

fn crossing(psd: &Psd, level: f64) -> Option<f64> {
    let mut cum = 0.0;
    for (k, &p) in psd.power.iter().enumerate() {
        let next = cum + p;
        if next >= level {
            if k == 0 || p == 0.0 {
                return Some(psd.freqs[k]);
            }
            let frac = (level - cum) / p;
            return Some(psd.freqs[k - 1] + frac * (psd.freqs[k] - psd.freqs[k - 1]));
        }
        cum = next;
    }
    psd.freqs.last().copied()
}
