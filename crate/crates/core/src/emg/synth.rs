//! Seeded synthetic sEMG: band-limited Gaussian noise with a drifting median
//! frequency and a piecewise-linear amplitude envelope.
//!
//! The generator shapes fresh white noise block by block in the frequency
//! domain and overlap-adds the blocks with a power-complementary sine
//! window. Within each block the power density is two-level on
//! `[100, 400]` Hz, split at the block's target median
//! `250 + drift * t` (held inside `[110, 390]`), so each half of the band
//! carries exactly half the power. The unit-variance result is multiplied by
//! the envelope, which makes the envelope the RMS amplitude.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::EmgTrace;
use crate::error::{check_positive, Result, TwinError};

pub const BAND_LO: f64 = 100.0;
pub const BAND_HI: f64 = 400.0;
pub const DEFAULT_RATE: f64 = 2000.0;
const MEDIAN_MARGIN: f64 = 10.0;

/// Piecewise-linear amplitude profile, held constant outside its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    knots: Vec<(f64, f64)>,
}

impl Envelope {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(TwinError::invalid("envelope", "at least one knot required"));
        }
        if knots.iter().any(|(t, a)| !t.is_finite() || !a.is_finite() || *a < 0.0) {
            return Err(TwinError::invalid("envelope", "knots must be finite with non-negative amplitude"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(TwinError::invalid("envelope", "knot times must increase strictly"));
        }
        Ok(Self { knots })
    }

    pub fn constant(amplitude: f64) -> Result<Self> {
        Self::new(vec![(0.0, amplitude)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        let last = k[k.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let i = k.partition_point(|p| p.0 <= t);
        let (t0, a0) = k[i - 1];
        let (t1, a1) = k[i];
        a0 + (a1 - a0) * (t - t0) / (t1 - t0)
    }
}

/// Median frequency targeted by the generator at time `t`.
pub fn target_median(mdf_drift: f64, t: f64) -> f64 {
    (0.5 * (BAND_LO + BAND_HI) + mdf_drift * t).clamp(BAND_LO + MEDIAN_MARGIN, BAND_HI - MEDIAN_MARGIN)
}

pub fn synth_emg(
    duration: f64,
    rate: f64,
    envelope: &Envelope,
    mdf_drift: f64,
    seed: u64,
    label: &str,
) -> Result<EmgTrace> {
    check_positive("duration", duration)?;
    if !(rate > 2.0 * BAND_HI) {
        return Err(TwinError::Nyquist {
            rate,
            required: 2.0 * BAND_HI,
        });
    }
    if !mdf_drift.is_finite() {
        return Err(TwinError::invalid("mdf_drift", "must be finite"));
    }
    let n = (duration * rate).round() as usize;
    if n == 0 {
        return Err(TwinError::invalid("duration", "shorter than one sample"));
    }

    // ~4 Hz shaping resolution at any rate
    let block = ((rate / 4.0).ceil() as usize).next_power_of_two().max(64);
    let hop = block / 2;
    let window: Vec<f64> = (0..block).map(|k| (PI * (k as f64 + 0.5) / block as f64).sin()).collect();

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(block);
    let inv = planner.plan_fft_inverse(block);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); block];

    let mut start: isize = -(hop as isize);
    while start < n as isize {
        let t_center = (start as f64 + block as f64 / 2.0) / rate;
        let gains = band_gains(block, rate, target_median(mdf_drift, t_center));
        for b in buf.iter_mut() {
            *b = Complex64::new(StandardNormal.sample(&mut rng), 0.0);
        }
        fwd.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= gains[k.min(block - k)];
        }
        inv.process(&mut buf);
        for (k, c) in buf.iter().enumerate() {
            let idx = start + k as isize;
            if idx >= 0 && (idx as usize) < n {
                out[idx as usize] += c.re / block as f64 * window[k];
            }
        }
        start += hop as isize;
    }

    for (i, v) in out.iter_mut().enumerate() {
        *v *= envelope.value(i as f64 / rate);
    }
    EmgTrace::new(out, rate, label)
}

/// Per-bin amplitude gains (bins `0..=block/2`) for a two-level density
/// with equal power either side of `median`, scaled to unit output variance.
fn band_gains(block: usize, rate: f64, median: f64) -> Vec<f64> {
    let half = block / 2;
    let density = |f: f64| {
        if !(BAND_LO..=BAND_HI).contains(&f) {
            0.0
        } else if f < median {
            0.5 / (median - BAND_LO)
        } else {
            0.5 / (BAND_HI - median)
        }
    };
    let mut gains: Vec<f64> = (0..=half).map(|k| density(k as f64 * rate / block as f64).sqrt()).collect();
    // Variance of the shaped block: sum over the full two-sided spectrum / N.
    let two_sided: f64 = (0..block).map(|k| gains[k.min(block - k)].powi(2)).sum();
    let norm = (block as f64 / two_sided).sqrt();
    for g in &mut gains {
        *g *= norm;
    }
    gains
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_interpolation() {
        let e = Envelope::new(vec![(1.0, 0.0), (3.0, 2.0)]).unwrap();
        assert_eq!(e.value(0.0), 0.0);
        assert_eq!(e.value(2.0), 1.0);
        assert_eq!(e.value(5.0), 2.0);
        assert!(Envelope::new(vec![(1.0, 0.0), (1.0, 2.0)]).is_err());
        assert!(Envelope::new(vec![(0.0, -1.0)]).is_err());
    }

    #[test]
    fn zero_envelope_gives_zero_trace() {
        let e = Envelope::constant(0.0).unwrap();
        let tr = synth_emg(1.0, 2000.0, &e, 0.0, 1, "x").unwrap();
        assert!(tr.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_trace() {
        let e = Envelope::constant(1.0).unwrap();
        let a = synth_emg(2.0, 2000.0, &e, -1.0, 9, "x").unwrap();
        let b = synth_emg(2.0, 2000.0, &e, -1.0, 9, "x").unwrap();
        let c = synth_emg(2.0, 2000.0, &e, -1.0, 10, "x").unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_variance_times_envelope() {
        let e = Envelope::constant(0.7).unwrap();
        let tr = synth_emg(20.0, 2000.0, &e, 0.0, 3, "x").unwrap();
        let ms = tr.samples().iter().map(|v| v * v).sum::<f64>() / tr.len() as f64;
        assert!((ms.sqrt() - 0.7).abs() / 0.7 < 0.03, "{}", ms.sqrt());
    }

    #[test]
    fn rejects_low_rate() {
        let e = Envelope::constant(1.0).unwrap();
        assert!(matches!(synth_emg(1.0, 800.0, &e, 0.0, 0, "x"), Err(TwinError::Nyquist { .. })));
    }

    #[test]
    fn gains_have_equal_halves() {
        let g = band_gains(512, 2000.0, 200.0);
        let df = 2000.0 / 512.0;
        let below: f64 = g.iter().enumerate().filter(|(k, _)| (*k as f64) * df < 200.0).map(|(_, x)| x * x).sum();
        let total: f64 = g.iter().map(|x| x * x).sum();
        assert!((below / total - 0.5).abs() < 0.02);
    }
}
