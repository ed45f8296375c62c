//! sEMG analysis: segmentation, 100-400 Hz band-pass, windowed RMS, iEMG,
//! median frequency and between-condition reductions.

mod filter;
mod spectrum;
mod synth;

pub use filter::{Biquad, Sos};
pub use spectrum::{median_frequency, welch, Psd, WelchConfig};
pub use synth::{synth_emg, target_median, Envelope, BAND_HI, BAND_LO, DEFAULT_RATE};

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Result, TwinError};

pub const BANDPASS_ORDER: usize = 4;
pub const ENVELOPE_CUTOFF: f64 = 6.0;
pub const MIN_MDF_WINDOW: usize = 256;

/// Uniformly sampled sEMG channel, amplitude in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgTrace {
    samples: Vec<f64>,
    rate: f64,
    label: String,
}

impl EmgTrace {
    pub fn new(samples: Vec<f64>, rate: f64, label: impl Into<String>) -> Result<Self> {
        if !(rate > 2.0 * BAND_HI) || !rate.is_finite() {
            return Err(TwinError::Nyquist {
                rate,
                required: 2.0 * BAND_HI,
            });
        }
        if samples.is_empty() {
            return Err(TwinError::invalid("trace", "no samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(TwinError::invalid("trace", "non-finite sample"));
        }
        Ok(Self {
            samples,
            rate,
            label: label.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample count over rate: sample `i` covers `[i/rate, (i+1)/rate)`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            rate: self.rate,
            label: self.label.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisWindow {
    pub length: f64,
    pub overlap: f64,
}

impl AnalysisWindow {
    pub fn new(length: f64, overlap: f64) -> Result<Self> {
        check_positive("window length", length)?;
        if !(0.0..1.0).contains(&overlap) {
            return Err(TwinError::invalid("window overlap", format!("must be in [0, 1), got {overlap}")));
        }
        Ok(Self { length, overlap })
    }

    /// Window and hop in samples for `trace`.
    fn layout(&self, trace: &EmgTrace) -> Result<(usize, usize)> {
        let n = (self.length * trace.rate).round() as usize;
        if n == 0 || n > trace.len() {
            return Err(TwinError::invalid(
                "window",
                format!("{n} samples does not fit a {}-sample trace", trace.len()),
            ));
        }
        let hop = ((n as f64 * (1.0 - self.overlap)).round() as usize).max(1);
        Ok((n, hop))
    }

    fn starts(&self, trace: &EmgTrace) -> Result<(usize, Vec<usize>)> {
        let (n, hop) = self.layout(trace)?;
        let starts = (0..=trace.len() - n).step_by(hop).collect();
        Ok((n, starts))
    }
}

/// Half-open time slice `[t0, t1)`.
pub fn segment(trace: &EmgTrace, t0: f64, t1: f64) -> Result<EmgTrace> {
    let dur = trace.duration();
    if !(0.0 <= t0 && t0 < t1 && t1 <= dur * (1.0 + 1e-12)) {
        return Err(TwinError::invalid(
            "segment",
            format!("need 0 <= t0 < t1 <= {dur}, got [{t0}, {t1})"),
        ));
    }
    let index = |t: f64| ((t * trace.rate - 1e-9).ceil().max(0.0) as usize).min(trace.len());
    let (i0, i1) = (index(t0), index(t1));
    if i1 <= i0 {
        return Err(TwinError::invalid("segment", "selects no samples"));
    }
    Ok(trace.with_samples(trace.samples[i0..i1].to_vec()))
}

/// Zero-phase 4th-order Butterworth band-pass, 100-400 Hz.
pub fn bandpass(trace: &EmgTrace) -> Result<EmgTrace> {
    let sos = Sos::butter_bandpass(BANDPASS_ORDER, BAND_LO, BAND_HI, trace.rate)?;
    Ok(trace.with_samples(sos.filtfilt(&trace.samples)))
}

/// Rectification followed by a zero-phase low-pass (2nd-order, 6 Hz).
pub fn linear_envelope(trace: &EmgTrace) -> Result<EmgTrace> {
    let sos = Sos::butter_lowpass(2, ENVELOPE_CUTOFF, trace.rate)?;
    let rectified: Vec<f64> = trace.samples.iter().map(|v| v.abs()).collect();
    Ok(trace.with_samples(sos.filtfilt(&rectified)))
}

/// Windowed RMS, one `(center time, mV)` per window.
pub fn rms_windowed(trace: &EmgTrace, win: &AnalysisWindow) -> Result<Vec<(f64, f64)>> {
    let (n, starts) = win.starts(trace)?;
    Ok(starts
        .into_iter()
        .map(|s| {
            let ms = trace.samples[s..s + n].iter().map(|v| v * v).sum::<f64>() / n as f64;
            ((s as f64 + n as f64 / 2.0) / trace.rate, ms.sqrt())
        })
        .collect())
}

/// Trapezoidal integral of the rectified signal over the sampled span,
/// in mV*s.
pub fn iemg(trace: &EmgTrace) -> f64 {
    let dt = 1.0 / trace.rate;
    trace
        .samples
        .windows(2)
        .map(|w| 0.5 * (w[0].abs() + w[1].abs()) * dt)
        .sum()
}

/// Windowed median frequency with the default Welch settings.
pub fn mdf(trace: &EmgTrace, win: &AnalysisWindow) -> Result<Vec<(f64, f64)>> {
    mdf_with(trace, win, &WelchConfig::default())
}

pub fn mdf_with(trace: &EmgTrace, win: &AnalysisWindow, cfg: &WelchConfig) -> Result<Vec<(f64, f64)>> {
    let (n, starts) = win.starts(trace)?;
    if n < MIN_MDF_WINDOW {
        return Err(TwinError::invalid(
            "mdf window",
            format!("{n} samples is below the {MIN_MDF_WINDOW}-sample minimum"),
        ));
    }
    if cfg.segment_divisor == 0 {
        return Err(TwinError::invalid("welch segment divisor", "must be positive"));
    }
    let seg = n / cfg.segment_divisor;
    starts
        .into_iter()
        .map(|s| {
            let psd = welch(&trace.samples[s..s + n], trace.rate, seg, cfg)?;
            // A silent window has no spectrum to split; report 0 Hz.
            let f = median_frequency(&psd).unwrap_or(0.0);
            Ok(((s as f64 + n as f64 / 2.0) / trace.rate, f))
        })
        .collect()
}

/// Percentage drop from `baseline` to `assisted`.
pub fn reduction_percent(baseline: f64, assisted: f64) -> Result<f64> {
    if !(baseline > 0.0) {
        return Err(TwinError::invalid("baseline", format!("must be positive, got {baseline}")));
    }
    Ok((baseline - assisted) / baseline * 100.0)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Least-squares slope of `(x, y)` pairs.
pub fn linear_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Pearson correlation coefficient.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        None
    } else {
        Some(cov / (va * vb).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sine(amp: f64, f: f64, rate: f64, n: usize) -> EmgTrace {
        let s = (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / rate).sin()).collect();
        EmgTrace::new(s, rate, "test").unwrap()
    }

    fn constant(c: f64, rate: f64, n: usize) -> EmgTrace {
        EmgTrace::new(vec![c; n], rate, "c").unwrap()
    }

    fn amplitude(x: &[f64]) -> f64 {
        (2.0 * x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn trace_validation() {
        assert!(EmgTrace::new(vec![1.0], 800.0, "x").is_err());
        assert!(EmgTrace::new(vec![], 1000.0, "x").is_err());
        assert!(EmgTrace::new(vec![f64::NAN], 1000.0, "x").is_err());
    }

    #[test]
    fn segment_cases() {
        let tr = constant(1.0, 1000.0, 3000);
        assert_eq!(segment(&tr, 0.0, tr.duration()).unwrap(), tr);
        let s = segment(&tr, 1.0, 2.0).unwrap();
        assert_eq!(s.len(), 1000);
        assert_eq!(s.rate(), 1000.0);
        assert_eq!(s.label(), "c");
        assert!(segment(&tr, 1.0, 3.5).is_err());
        assert!(segment(&tr, 2.0, 1.0).is_err());
        assert_eq!(segment(&tr, 1.0, 1.0000001).unwrap().len(), 1);
        // falls between two samples
        assert!(segment(&tr, 1.0001, 1.0002).is_err());
    }

    #[test]
    fn bandpass_passband_and_stopband() {
        let rate = 2000.0;
        let n = 8000;
        let mid = 2000..6000;
        let pass = bandpass(&sine(1.0, 250.0, rate, n)).unwrap();
        assert_eq!(pass.len(), n);
        let a = amplitude(&pass.samples()[mid.clone()]);
        assert!((a - 1.0).abs() < 0.01, "{a}");
        let stop = bandpass(&sine(1.0, 10.0, rate, n)).unwrap();
        let a = amplitude(&stop.samples()[mid.clone()]);
        assert!(20.0 * a.log10() <= -40.0, "{a}");
        let zero = bandpass(&constant(0.0, rate, 500)).unwrap();
        assert!(zero.samples().iter().all(|&v| v == 0.0));
        assert!(bandpass(&constant(0.0, 801.0, 500)).is_ok());
    }

    #[test]
    fn bandpass_idempotent_in_band() {
        let once = bandpass(&sine(1.0, 200.0, 2000.0, 8000)).unwrap();
        let twice = bandpass(&once).unwrap();
        let a1 = amplitude(&once.samples()[2000..6000]);
        let a2 = amplitude(&twice.samples()[2000..6000]);
        assert!(((a2 - a1) / a1).abs() < 0.005);
    }

    #[test]
    fn rms_cases() {
        let win = AnalysisWindow::new(0.1, 0.5).unwrap();
        for (_, v) in rms_windowed(&constant(-2.0, 1000.0, 1000), &win).unwrap() {
            assert!((v - 2.0).abs() < 1e-12);
        }
        // 0.1 s windows hold 5 full periods of 50 Hz
        for (_, v) in rms_windowed(&sine(3.0, 50.0, 1000.0, 1000), &win).unwrap() {
            assert!((v - 3.0 / 2f64.sqrt()).abs() < 1e-9);
        }
        let alt = EmgTrace::new((0..1000).map(|i| if i % 2 == 0 { 1.5 } else { -1.5 }).collect(), 1000.0, "a").unwrap();
        for (_, v) in rms_windowed(&alt, &win).unwrap() {
            assert!((v - 1.5).abs() < 1e-12);
        }
        let first = rms_windowed(&alt, &win).unwrap()[0].0;
        assert!((first - 0.05).abs() < 1e-12);
        assert!(rms_windowed(&alt, &AnalysisWindow::new(2.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn iemg_cases() {
        // samples at t = 0..=T inclusive
        let tr = constant(2.0, 1000.0, 3001);
        assert!((iemg(&tr) - 6.0).abs() < 1e-9);
        assert_eq!(iemg(&constant(0.0, 1000.0, 10)), 0.0);
        // one period of 10 Hz at 1000 samples/s = 100 samples per period
        let (a, f) = (2.0, 10.0);
        let one = sine(a, f, 1000.0, 101);
        let want = 2.0 * a / (PI * f);
        assert!((iemg(&one) - want).abs() / want < 1e-3);
    }

    #[test]
    fn mdf_tone() {
        let tr = sine(1.0, 200.0, 2000.0, 4000);
        let win = AnalysisWindow::new(1.0, 0.0).unwrap();
        let bin = 2000.0 / 500.0;
        for (_, f) in mdf(&tr, &win).unwrap() {
            assert!((f - 200.0).abs() <= bin, "{f}");
        }
        assert!(mdf(&tr, &AnalysisWindow::new(0.1, 0.0).unwrap()).is_err());
    }

    #[test]
    fn mdf_two_tones() {
        let a = sine(1.0, 150.0, 2000.0, 4000);
        let b = sine(1.0, 350.0, 2000.0, 4000);
        let s: Vec<f64> = a.samples().iter().zip(b.samples()).map(|(x, y)| x + y).collect();
        let tr = EmgTrace::new(s, 2000.0, "two").unwrap();
        for (_, f) in mdf(&tr, &AnalysisWindow::new(1.0, 0.0).unwrap()).unwrap() {
            assert!((f - 250.0).abs() <= 4.0, "{f}");
        }
    }

    #[test]
    fn reductions() {
        assert_eq!(reduction_percent(100.0, 25.0).unwrap(), 75.0);
        assert_eq!(reduction_percent(3.0, 3.0).unwrap(), 0.0);
        assert!(reduction_percent(0.0, 1.0).is_err());
        let m = mean(&[75.75, 86.04, 62.10]).unwrap();
        assert!((m - 74.63).abs() < 1e-9);
    }

    #[test]
    fn linear_envelope_of_constant_amplitude_sine() {
        let tr = sine(1.0, 173.3, 2000.0, 8000);
        let env = linear_envelope(&tr).unwrap();
        let mean_abs = tr.samples().iter().map(|v| v.abs()).sum::<f64>() / tr.len() as f64;
        assert!((mean_abs - 2.0 / PI).abs() < 0.01);
        for v in &env.samples()[2000..6000] {
            assert!((v - mean_abs).abs() < 0.01, "{v}");
        }
    }

    #[test]
    fn iemg_additive_over_segments() {
        let tr = synth_emg(4.0, 2000.0, &Envelope::constant(1.0).unwrap(), 0.0, 4, "x").unwrap();
        let a = segment(&tr, 0.0, 2.0).unwrap();
        let b = segment(&tr, 2.0, 4.0).unwrap();
        let gap = 0.5 * (a.samples().last().unwrap().abs() + b.samples()[0].abs()) / tr.rate();
        let max_sample = tr.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((iemg(&a) + iemg(&b) + gap - iemg(&tr)).abs() < 1e-9);
        assert!((iemg(&a) + iemg(&b) - iemg(&tr)).abs() <= max_sample / tr.rate());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn scaling(scale in 0.01f64..100.0, seed in 0u64..1000) {
            let tr = synth_emg(1.0, 2000.0, &Envelope::constant(1.0).unwrap(), 0.0, seed, "x").unwrap();
            let scaled = EmgTrace::new(tr.samples().iter().map(|v| v * scale).collect(), tr.rate(), "s").unwrap();
            let win = AnalysisWindow::new(0.25, 0.0).unwrap();
            let (r1, r2) = (rms_windowed(&tr, &win).unwrap(), rms_windowed(&scaled, &win).unwrap());
            for (a, b) in r1.iter().zip(&r2) {
                prop_assert!((b.1 - scale * a.1).abs() <= 1e-9 * b.1);
            }
            prop_assert!((iemg(&scaled) - scale * iemg(&tr)).abs() <= 1e-9 * iemg(&scaled));
            let (m1, m2) = (mdf(&tr, &win).unwrap(), mdf(&scaled, &win).unwrap());
            for (a, b) in m1.iter().zip(&m2) {
                prop_assert!((a.1 - b.1).abs() < 1e-6);
            }
        }
    }
}
