//! Butterworth IIR design (bilinear transform with prewarping) realized as
//! cascaded second-order sections, plus zero-phase forward-backward
//! filtering.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, TwinError};

/// One direct-form II transposed biquad, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2) / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[1] + self.a[2])
    }

    /// State reached after a unit step has settled.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * g;
        let z1 = self.b[1] - self.a[1] * g + z2;
        [z1, z2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

fn check_edge(f: f64, fs: f64) -> Result<()> {
    if !(f > 0.0) || f >= fs / 2.0 {
        return Err(TwinError::Nyquist {
            rate: fs,
            required: 2.0 * f,
        });
    }
    Ok(())
}

fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

fn bilinear(s: Complex64, fs2: f64) -> Complex64 {
    (fs2 + s) / (fs2 - s)
}

/// Groups digital poles into sections. Conjugate pairs become quadratic
/// denominators; leftover real poles are paired or left first-order.
fn pole_sections(poles: &[Complex64]) -> Vec<[f64; 3]> {
    const IM_TOL: f64 = 1e-12;
    let mut out = Vec::new();
    let mut reals = Vec::new();
    for p in poles {
        if p.im > IM_TOL {
            out.push([1.0, -2.0 * p.re, p.norm_sqr()]);
        } else if p.im.abs() <= IM_TOL {
            reals.push(p.re);
        }
    }
    for pair in reals.chunks(2) {
        match pair {
            [r1, r2] => out.push([1.0, -(r1 + r2), r1 * r2]),
            [r] => out.push([1.0, -r, 0.0]),
            _ => unreachable!(),
        }
    }
    out
}

impl Sos {
    /// Low-pass Butterworth of the given order, unit gain at DC.
    pub fn butter_lowpass(order: usize, fc: f64, fs: f64) -> Result<Self> {
        if order == 0 {
            return Err(TwinError::invalid("filter order", "must be at least 1"));
        }
        check_edge(fc, fs)?;
        let fs2 = 2.0 * fs;
        let wc = fs2 * (PI * fc / fs).tan();
        let poles: Vec<Complex64> = prototype_poles(order).iter().map(|p| bilinear(p * wc, fs2)).collect();
        let sections = pole_sections(&poles)
            .into_iter()
            .map(|a| {
                let b = if a[2] == 0.0 { [1.0, 1.0, 0.0] } else { [1.0, 2.0, 1.0] };
                Biquad { b, a }
            })
            .collect();
        let mut sos = Sos { sections };
        sos.normalize_at(0.0, fs);
        Ok(sos)
    }

    /// Band-pass Butterworth from an order-`order` low-pass prototype
    /// (`2 * order` poles), unit gain at the geometric center frequency.
    pub fn butter_bandpass(order: usize, f_lo: f64, f_hi: f64, fs: f64) -> Result<Self> {
        if order == 0 || !order.is_multiple_of(2) {
            return Err(TwinError::invalid("filter order", "band-pass prototype order must be even"));
        }
        check_edge(f_lo, fs)?;
        check_edge(f_hi, fs)?;
        if f_lo >= f_hi {
            return Err(TwinError::invalid("band edges", "lower edge must be below upper edge"));
        }
        let fs2 = 2.0 * fs;
        let w1 = fs2 * (PI * f_lo / fs).tan();
        let w2 = fs2 * (PI * f_hi / fs).tan();
        let bw = w2 - w1;
        let w0 = (w1 * w2).sqrt();
        let mut poles = Vec::with_capacity(2 * order);
        for p in prototype_poles(order) {
            let q = p * (bw / 2.0);
            let r = (q * q - w0 * w0).sqrt();
            poles.push(bilinear(q + r, fs2));
            poles.push(bilinear(q - r, fs2));
        }
        let sections = pole_sections(&poles)
            .into_iter()
            .map(|a| Biquad { b: [1.0, 0.0, -1.0], a })
            .collect();
        let mut sos = Sos { sections };
        let f_center = fs / PI * (w0 / fs2).atan();
        sos.normalize_at(f_center, fs);
        Ok(sos)
    }

    fn normalize_at(&mut self, f: f64, fs: f64) {
        let g = self.response(f, fs).norm();
        if let Some(first) = self.sections.first_mut() {
            for b in &mut first.b {
                *b /= g;
            }
        }
    }

    /// Complex frequency response at `f` hertz.
    pub fn response(&self, f: f64, fs: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / fs);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    fn run(&self, x: &[f64], init: Option<f64>) -> Vec<f64> {
        let mut y = x.to_vec();
        let mut scale = init.unwrap_or(0.0);
        for s in &self.sections {
            let [mut z1, mut z2] = s.step_state();
            z1 *= scale;
            z2 *= scale;
            scale *= s.dc_gain();
            for v in y.iter_mut() {
                let xin = *v;
                let out = s.b[0] * xin + z1;
                z1 = s.b[1] * xin - s.a[1] * out + z2;
                z2 = s.b[2] * xin - s.a[2] * out;
                *v = out;
            }
        }
        y
    }

    /// Causal filtering from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        self.run(x, None)
    }

    /// Zero-phase filtering: odd-reflection padding, steady-state initial
    /// conditions, then forward and backward passes. Output length equals
    /// input length.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        let fwd = self.run(&ext, Some(ext[0]));
        let mut rev: Vec<f64> = fwd.into_iter().rev().collect();
        let first = rev[0];
        rev = self.run(&rev, Some(first));
        rev.reverse();
        rev[pad..pad + n].to_vec()
    }
}
