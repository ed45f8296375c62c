//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always show up in `cargo test` output.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mrhe_core::clutch::{cyclic_loop, ClutchConfig, DEFAULT_COEFFS};
use mrhe_core::control::{control_step, ControlState, Mode, SensorSample, Thresholds};
use mrhe_core::emg::{self, synth_emg, AnalysisWindow, EmgTrace, Envelope};
use mrhe_core::kinetics::LinkageGeometry;
use mrhe_core::report::discrepancies;
use mrhe_core::sim::{run_scenario, ScenarioConfig, ScenarioKind};
use mrhe_core::waveform::{SwitchingMode, SwitchingProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn naive_poly(c: &[f64], v: f64) -> f64 {
    c.iter().enumerate().map(|(k, ck)| ck * v.powi(k as i32)).sum()
}

fn c1_force_polynomial() -> Outcome {
    let clutch = ClutchConfig::default();
    let f0 = clutch.peak_holding_force(0.0).unwrap();
    let f2 = clutch.peak_holding_force(2.0).unwrap();
    let oracle = naive_poly(&DEFAULT_COEFFS, 2.0);
    let pass = f0 == 8.336 && (f2 - oracle).abs() <= 1e-9 && (f2 - 363.504).abs() < 1e-6;
    outcome(pass, format!("F(0)={f0}, F(2)={f2:.9}, naive={oracle:.9}"))
}

fn c2_transmission() -> Outcome {
    let g = LinkageGeometry::default();
    let d = |x: f64| x.to_radians();
    let xi = d(g.theta3).cos() * d(g.theta7).cos() * d(g.theta10).cos()
        / (d(g.theta1).sin() * d(g.theta5).cos() * d(g.d87).sin() * d(g.d9_10).sin());
    let oracle = d(g.beta).sin() * g.l14 / (d(g.alpha).sin() * g.l13 * xi);
    let gain = g.clutch_to_load_gain().unwrap();
    let pass = (0.2845..=0.2860).contains(&gain) && (gain - oracle).abs() < 1e-12;
    outcome(pass, format!("composed gain {gain:.7} (oracle {oracle:.7})"))
}

fn c3_support_force() -> Outcome {
    let clutch = ClutchConfig::default();
    let geom = LinkageGeometry::default();
    let composed = geom.support_force(2.0, &clutch.force_model).unwrap();
    let ledger = discrepancies(&clutch, &geom).unwrap();
    let support = ledger.iter().find(|d| d.id == "support_2v").unwrap();
    let has = |x: f64, tol: f64| support.values.iter().any(|v| (v.value - x).abs() < tol);
    let listed = has(414.8, 0.05) && has(401.8, 0.05) && has(419.79, 1e-9);
    let flagged_1pct = support.flagged && support.tolerance == 0.01;
    let coeff_flags: Vec<&str> = ledger
        .iter()
        .filter(|d| d.id.starts_with("support_coeff_") && d.flagged)
        .map(|d| d.id.as_str())
        .collect();
    let pass = (410.0..=420.0).contains(&composed) && listed && flagged_1pct && !coeff_flags.is_empty();
    outcome(
        pass,
        format!(
            "composed {composed:.3} N, triplet listed={listed}, printed-vs-composed spread {:.4} flagged={flagged_1pct}, coefficient flags {coeff_flags:?}",
            support.rel_spread
        ),
    )
}

fn c4_force_to_power() -> Outcome {
    let clutch = ClutchConfig::default();
    let p2 = clutch.power_consumption(2.0).unwrap();
    let measured = 368.24 / p2;
    let fitted = clutch.force_to_power_ratio(2.0).unwrap();
    let at3 = clutch.force_to_power_ratio(3.0).unwrap();
    let pass = rel(measured, 276.18) <= 0.02 && rel(fitted, 276.18) <= 0.04 && rel(at3, 127.05) <= 0.02;
    outcome(
        pass,
        format!("2 V measured {measured:.2}, 2 V fitted {fitted:.2}, 3 V fitted {at3:.2} N/W"),
    )
}

fn c5_waveform() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut pass = true;
    for _ in 0..100 {
        let vc = rng.random_range(0.0..=3.0);
        let vt = rng.random_range(0.0..=3.0);
        let tau = rng.random_range(0.01..0.2);
        let m = rng.random_range(1..=6u32);
        let bc = SwitchingProfile::new(vc, vt, tau, m, SwitchingMode::BoundaryConsistent, 3.0).unwrap();
        let ap = SwitchingProfile::new(vc, vt, tau, m, SwitchingMode::AsPrinted, 3.0).unwrap();
        let bound = (-(m as f64)).exp() * (vt - vc).abs();
        let end_err = (bc.switching_voltage(tau).unwrap() - vt).abs();
        worst = worst.max(end_err - bound);
        pass &= bc.switching_voltage(0.0).unwrap() == vc;
        pass &= end_err <= bound + 1e-12;
        pass &= (ap.switching_voltage(0.0).unwrap() - (2.0 * vt - vc)).abs() <= 1e-12;
    }
    outcome(pass, format!("100 profiles, worst end excess over bound {worst:.2e} V"))
}

fn c6_control() -> Outcome {
    let start = Instant::now();
    let thr = Thresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sample = |s1: f64, s2: f64| SensorSample::new(0.0, s1, s2, 3.3).unwrap();

    let mut latch_transitions = 0;
    for mode in [Mode::Off, Mode::Engaged] {
        let mut s = ControlState::new(2.0);
        while s.mode != mode {
            s = control_step(s, &sample(0.5, 2.5), &thr).0;
        }
        for _ in 0..100_000 {
            let x = sample(rng.random_range(thr.th1..=thr.th2), rng.random_range(thr.th1..=thr.th2));
            let (next, _) = control_step(s, &x, &thr);
            latch_transitions += (next.mode != s.mode) as u32;
            s = next;
        }
    }

    // triggering samples interleaved with noise never persist for 3 samples
    let mut chatter = 0;
    let mut s = ControlState::new(2.0);
    for i in 0..10_000 {
        let x = if i % 2 == 0 {
            sample(rng.random_range(0.0..0.99), rng.random_range(2.01..3.3))
        } else {
            sample(rng.random_range(0.0..3.3), rng.random_range(1.0..2.0))
        };
        let (next, _) = control_step(s, &x, &thr);
        chatter += (next.mode != s.mode) as u32;
        s = next;
    }

    let mut s = ControlState::new(2.0);
    for _ in 0..3 {
        s = control_step(s, &sample(0.5, 2.5), &thr).0;
    }
    let engaged = s.mode == Mode::Engaged;
    for _ in 0..3 {
        s = control_step(s, &sample(2.5, 0.5), &thr).0;
    }
    let released = s.mode == Mode::Off;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = latch_transitions == 0 && chatter == 0 && engaged && released && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "band transitions {latch_transitions}, chatter transitions {chatter}, grip->engaged {engaged}, release->off {released}, {elapsed:.3} s"
        ),
    )
}

fn c7_hysteresis() -> Outcome {
    let start = Instant::now();
    let clutch = ClutchConfig::default();
    let f_peak = clutch.peak_holding_force(2.0).unwrap();
    let (m, trace) = cyclic_loop(&clutch, 2.0, 0.010, 0.010, 1e-3, 3).unwrap();
    let (x0, f0) = trace[0];
    let (x1, f1) = *trace.last().unwrap();
    let closed = (x0 - x1).abs() < 1e-12 && (f0 - f1).abs() < 1e-6 * f_peak;
    let bounded = trace.iter().all(|p| p.1.abs() <= f_peak * (1.0 + 1e-12));
    let heights: Vec<f64> = [0.0, 0.5, 1.0, 1.5, 2.0]
        .iter()
        .map(|&v| cyclic_loop(&clutch, v, 0.010, 0.010, 1e-3, 3).unwrap().0.height())
        .collect();
    let increasing = heights.windows(2).all(|w| w[1] > w[0]);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = closed && bounded && m.area > 0.0 && increasing && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "closed={closed}, bounded={bounded}, area {:.3} J, heights {:?} N, {elapsed:.3} s",
            m.area,
            heights.iter().map(|h| (h * 10.0).round() / 10.0).collect::<Vec<_>>()
        ),
    )
}

fn c8_emg() -> Outcome {
    let start = Instant::now();
    let (a, f, rate) = (1.7, 50.0, 2000.0);
    let sine = |n: usize| {
        EmgTrace::new(
            (0..n).map(|i| a * (2.0 * PI * f * i as f64 / rate).sin()).collect(),
            rate,
            "sine",
        )
        .unwrap()
    };
    // 10 periods of 40 samples in one window
    let rms = emg::rms_windowed(&sine(400), &AnalysisWindow::new(0.2, 0.0).unwrap()).unwrap()[0].1;
    let rms_ok = (rms - a / 2f64.sqrt()).abs() <= 1e-9;
    // one 10 Hz period at 200 samples per period keeps the trapezoid error
    // near 1e-4
    let f_slow = 10.0;
    let slow = EmgTrace::new(
        (0..=200).map(|i| a * (2.0 * PI * f_slow * i as f64 / rate).sin()).collect(),
        rate,
        "slow",
    )
    .unwrap();
    let one_period = emg::iemg(&slow);
    let iemg_err = rel(one_period, 2.0 * a / (PI * f_slow));
    let iemg_ok = iemg_err <= 1e-3;

    let win = AnalysisWindow::new(1.0, 0.0).unwrap();
    let flat = Envelope::constant(1.0).unwrap();
    let mdfs: Vec<f64> = (0..20)
        .map(|seed| {
            let x = synth_emg(10.0, rate, &flat, 0.0, seed, "flat").unwrap();
            emg::mean(&emg::mdf(&x, &win).unwrap().iter().map(|p| p.1).collect::<Vec<_>>()).unwrap()
        })
        .collect();
    let mdf = emg::mean(&mdfs).unwrap();
    let mdf_ok = rel(mdf, 250.0) <= 0.02;

    let reductions: Vec<f64> = [75.75, 86.04, 62.10]
        .iter()
        .map(|r| emg::reduction_percent(100.0, 100.0 - r).unwrap())
        .collect();
    let avg = emg::mean(&reductions).unwrap();
    let avg_ok = (avg - 74.63).abs() < 1e-9 && format!("{avg:.2}") == "74.63";
    let elapsed = start.elapsed().as_secs_f64();
    let pass = rms_ok && iemg_ok && mdf_ok && avg_ok && elapsed < 5.0;
    outcome(
        pass,
        format!(
            "rms {rms:.12} vs {:.12}, iemg rel err {:.2e}, mdf {mdf:.2} Hz, mean reduction {avg:.2}%, {elapsed:.2} s",
            a / 2f64.sqrt(),
            iemg_err
        ),
    )
}

fn c9_end_to_end() -> Outcome {
    let start = Instant::now();
    let clutch = ClutchConfig::default();
    let geom = LinkageGeometry::default();
    let thr = Thresholds::default();
    let assisted = ScenarioConfig::preset(ScenarioKind::StaticGrip);
    let unassisted = ScenarioConfig {
        assisted: false,
        ..assisted.clone()
    };
    let (t_grip, t_release) = assisted.held_intervals()[0];
    let steady = |s: &ScenarioConfig| {
        let log = run_scenario(s, &clutch, &geom, &thr).unwrap();
        let r = log.mean_over(t_grip + 1.0, t_release, |r| r.f_muscle_residual).unwrap();
        (log, r)
    };
    let (log_a, r_a) = steady(&assisted);
    let (log_u, r_u) = steady(&unassisted);

    let iemg_of = |log: &mrhe_core::sim::SimLog| {
        let env = log.residual_envelope(0.01, 0.01).unwrap();
        let x = synth_emg(log.duration(), 2000.0, &env, 0.0, 9, "flexor").unwrap();
        emg::iemg(&emg::bandpass(&x).unwrap())
    };
    let reduction = emg::reduction_percent(iemg_of(&log_u), iemg_of(&log_a)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = r_a == 0.0 && (r_u - 171.675).abs() <= 1e-3 && reduction > 95.0 && elapsed < 10.0;
    outcome(
        pass,
        format!("steady residual assisted {r_a} N, unassisted {r_u:.6} N, iEMG reduction {reduction:.2}%, {elapsed:.2} s"),
    )
}

fn mrhe(out_dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_mrhe"))
        .args(args)
        .env("MRHE_OUT_DIR", out_dir)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "mrhe {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fitted_coeffs(stdout: &str) -> Vec<f64> {
    stdout.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

fn c10_fit_round_trip() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let curve = mrhe(dir.path(), &["clutch", "curve", "--from", "0", "--to", "3", "--step", "0.01"]);
    let clean_csv = dir.path().join("clean.csv");
    std::fs::write(&clean_csv, curve).unwrap();
    let clean = fitted_coeffs(&mrhe(dir.path(), &["clutch", "fit", "--input", clean_csv.to_str().unwrap()]));
    let clean_err = clean.iter().zip(DEFAULT_COEFFS).map(|(c, d)| rel(*c, d)).fold(0.0, f64::max);

    // pre-registered noisy set: seed 42, 50 evenly spaced voltages on [0, 3],
    // uniform noise in [-1, 1] N
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let clutch = ClutchConfig::default();
    let mut noisy = String::from("voltage_v,peak_force_n\n");
    for i in 0..50 {
        let v = 3.0 * i as f64 / 49.0;
        let f = clutch.peak_holding_force(v).unwrap() + rng.random_range(-1.0..=1.0);
        noisy.push_str(&format!("{v},{f}\n"));
    }
    let noisy_csv = dir.path().join("noisy.csv");
    std::fs::write(&noisy_csv, noisy).unwrap();
    let fitted = fitted_coeffs(&mrhe(dir.path(), &["clutch", "fit", "--input", noisy_csv.to_str().unwrap()]));
    let noisy_errs: Vec<f64> = fitted.iter().zip(DEFAULT_COEFFS).map(|(c, d)| rel(*c, d)).collect();
    let noisy_err = noisy_errs.iter().copied().fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = clean.len() == 6 && clean_err <= 1e-6 && noisy_err <= 0.05 && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "noise-free max rel err {clean_err:.2e}; noisy per-coefficient rel err {:?}; {elapsed:.2} s",
            noisy_errs.iter().map(|e| format!("{:.2}%", 100.0 * e)).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("force polynomial", c1_force_polynomial),
        ("transmission coefficient", c2_transmission),
        ("support force and ledger", c3_support_force),
        ("force-to-power ratios", c4_force_to_power),
        ("waveform contract", c5_waveform),
        ("control latch", c6_control),
        ("hysteresis loop", c7_hysteresis),
        ("emg analytics", c8_emg),
        ("end-to-end static grip", c9_end_to_end),
        ("fit round trip", c10_fit_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.pass as usize;
        println!("criterion {:>2} {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
