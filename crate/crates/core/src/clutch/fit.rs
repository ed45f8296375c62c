//! Least-squares fit of the force-voltage polynomial to characterization data.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ForceVoltageModel;
use crate::error::{Result, TwinError};

/// Residual diagnostics returned alongside a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub degree: usize,
    /// `measured - fitted`, in sample order.
    pub residuals: Vec<f64>,
    pub rms: f64,
    pub max_abs: f64,
    pub r_squared: f64,
}

/// Fits a polynomial of `degree <= 5` to `(volts, newtons)` samples.
///
/// Unused high-order coefficients of the returned model are zero. The model
/// validity bound is the largest sampled voltage.
pub fn fit_force_voltage(samples: &[(f64, f64)], degree: usize) -> Result<(ForceVoltageModel, FitReport)> {
    if degree > 5 {
        return Err(TwinError::invalid("degree", format!("at most 5 supported, got {degree}")));
    }
    if samples.iter().any(|(v, f)| !v.is_finite() || !f.is_finite()) {
        return Err(TwinError::invalid("samples", "non-finite value"));
    }
    if samples.iter().any(|&(v, _)| v < 0.0) {
        return Err(TwinError::invalid("samples", "negative voltage"));
    }
    let mut volts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    volts.sort_by(f64::total_cmp);
    volts.dedup();
    if volts.len() < degree + 1 {
        return Err(TwinError::RankDeficient {
            distinct: volts.len(),
            degree,
        });
    }
    let v_max = *volts.last().expect("nonempty");
    if v_max <= 0.0 {
        return Err(TwinError::RankDeficient { distinct: 1, degree });
    }

    // Columns of u^k with u = v / v_max keep the design well conditioned.
    let n = samples.len();
    let cols = degree + 1;
    let design = DMatrix::from_fn(n, cols, |r, c| (samples[r].0 / v_max).powi(c as i32));
    let rhs = DVector::from_iterator(n, samples.iter().map(|s| s.1));
    let svd = design.clone().svd(true, true);
    let scaled = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| TwinError::invalid("fit", e.to_string()))?;

    let mut coeffs = [0.0; 6];
    for (k, a) in scaled.iter().enumerate() {
        coeffs[k] = a / v_max.powi(k as i32);
    }

    let fitted = &design * &scaled;
    let residuals: Vec<f64> = rhs.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let mean = rhs.mean();
    let ss_tot: f64 = rhs.iter().map(|y| (y - mean).powi(2)).sum();
    let report = FitReport {
        degree,
        rms: (ss_res / n as f64).sqrt(),
        max_abs: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        residuals,
    };
    Ok((ForceVoltageModel::new(coeffs, v_max)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clutch::force::DEFAULT_COEFFS;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eq2(v: f64) -> f64 {
        DEFAULT_COEFFS.iter().enumerate().map(|(k, c)| c * v.powi(k as i32)).sum()
    }

    #[test]
    fn exact_interpolation_recovers_coefficients() {
        let samples: Vec<(f64, f64)> = (0..7).map(|k| k as f64 * 0.5).map(|v| (v, eq2(v))).collect();
        let (model, report) = fit_force_voltage(&samples, 5).unwrap();
        for (got, want) in model.coeffs().iter().zip(DEFAULT_COEFFS) {
            assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(report.max_abs < 1e-9);
        assert_eq!(model.v_max(), 3.0);
    }

    #[test]
    fn constant_samples() {
        let samples: Vec<(f64, f64)> = (0..10).map(|k| (k as f64 * 0.3, 8.336)).collect();
        let (model, _) = fit_force_voltage(&samples, 5).unwrap();
        let c = model.coeffs();
        assert!((c[0] - 8.336).abs() < 1e-9);
        for ck in &c[1..] {
            assert!(ck.abs() < 1e-8, "{c:?}");
        }
    }

    #[test]
    fn rank_deficient() {
        let samples = vec![(0.0, 1.0), (1.0, 2.0), (1.0, 2.1), (2.0, 3.0)];
        assert_eq!(
            fit_force_voltage(&samples, 5).unwrap_err(),
            TwinError::RankDeficient { distinct: 3, degree: 5 }
        );
        assert!(fit_force_voltage(&samples, 2).is_ok());
    }

    #[test]
    fn lower_degree_pads_with_zeros() {
        let samples: Vec<(f64, f64)> = (0..5).map(|k| k as f64).map(|v| (v, 2.0 + 3.0 * v)).collect();
        let (model, _) = fit_force_voltage(&samples, 1).unwrap();
        assert!((model.coeffs()[0] - 2.0).abs() < 1e-12);
        assert!((model.coeffs()[1] - 3.0).abs() < 1e-12);
        assert_eq!(&model.coeffs()[2..], &[0.0; 4]);
    }

    /// Noisy fit stays within the statistical spread predicted by the
    /// least-squares covariance (4 standard deviations).
    #[test]
    fn noisy_fit_within_covariance_bounds() {
        let volts: Vec<f64> = (0..50).map(|k| 3.0 * k as f64 / 49.0).collect();
        // Oracle covariance from normal equations, noise variance 1/3.
        let design = DMatrix::from_fn(50, 6, |r, c| volts[r].powi(c as i32));
        let cov = (design.transpose() * &design).try_inverse().unwrap() / 3.0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<(f64, f64)> = volts
                .iter()
                .map(|&v| (v, eq2(v) + rng.random_range(-1.0..=1.0)))
                .collect();
            let (model, report) = fit_force_voltage(&samples, 5).unwrap();
            for k in 0..6 {
                let sd = cov[(k, k)].sqrt();
                assert!((model.coeffs()[k] - DEFAULT_COEFFS[k]).abs() < 4.0 * sd);
            }
            assert!(report.rms < 1.0 && report.max_abs < 2.0);
        }
    }
}
