//! Subcommand implementations. Each returns the text for standard output;
//! files go to the resolved output directory.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mrhe_core::clutch::{fit_force_voltage, ClutchConfig};
use mrhe_core::control::{pwm_duty, Command as Cmd, Controller};
use mrhe_core::emg::{self, AnalysisWindow, EmgTrace};
use mrhe_core::io::{self as csvio, write_table};
use mrhe_core::kinetics::printed_support_force;
use mrhe_core::numfmt::{exact, sig6};
use mrhe_core::plot::{line_plot, Series};
use mrhe_core::report::{discrepancies, published};
use mrhe_core::sim::{run_batch, run_scenario, ScenarioConfig, SimLog, SimRecord};
use mrhe_core::waveform::SwitchingProfile;
use mrhe_core::{Result, TwinError};
use serde::Serialize;

use crate::config::{resolve_out_dir, write_manifest, Manifest, ToolConfig};
use crate::{Cli, ClutchCmd, Command, ControlCmd, EmgCmd, KineticsCmd, ReportCmd, SimCmd, WaveformArgs};

const DEFAULT_PLOT_COLUMNS: [&str; 3] = ["f_required_n", "f_support_n", "f_muscle_residual_n"];

struct Ctx {
    config: ToolConfig,
    out_dir: PathBuf,
    seed: Option<u64>,
}

impl Ctx {
    fn file(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out_dir.join(name);
        let f = File::create(&path).map_err(|e| TwinError::Io(format!("{}: {e}", path.display())))?;
        Ok(BufWriter::new(f))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, text).map_err(|e| TwinError::Io(format!("{}: {e}", path.display())))
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| TwinError::Io(format!("{}: {e}", path.display())))
}

fn to_string(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("writers emit UTF-8")
}

pub fn run(cli: &Cli, args: &[String]) -> Result<String> {
    let config = ToolConfig::load(cli.config.as_deref())?;
    let ctx = Ctx {
        config,
        out_dir: resolve_out_dir(cli.out_dir.as_deref()),
        seed: cli.seed,
    };
    write_manifest(
        &ctx.out_dir,
        &Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            args,
            seed: cli.seed,
            config: &ctx.config,
        },
    )?;
    let clutch = ctx.config.clutch()?;
    match &cli.command {
        Command::Clutch(ClutchCmd::Curve { from, to, step }) => clutch_curve(&clutch, *from, *to, *step),
        Command::Clutch(ClutchCmd::Fit { input, degree }) => clutch_fit(&ctx, input, *degree),
        Command::Waveform(a) => waveform(&clutch, a),
        Command::Kinetics(KineticsCmd::SupportForce { volts }) => support_force(&ctx, &clutch, volts),
        Command::Control(ControlCmd::Trace {
            input,
            v_on,
            v_ref,
            v_supply,
            switching,
        }) => {
            let mut controller = Controller::new(
                ctx.config.thresholds,
                *v_on,
                switching.tau,
                switching.m,
                switching.mode.into(),
                clutch.force_model.clone(),
            )?;
            control_trace(&mut controller, input, *v_ref, *v_supply)
        }
        Command::Emg(EmgCmd::Analyze {
            input,
            baseline,
            window,
            overlap,
            raw,
        }) => {
            let win = AnalysisWindow::new(*window, *overlap)?;
            emg_analyze(&ctx, input, baseline.as_deref(), &win, *raw)
        }
        Command::Sim(SimCmd::Run {
            scenarios,
            preset,
            unassisted,
            batch,
            plot,
            no_plot,
        }) => {
            let mut jobs = Vec::new();
            if let Some(kind) = preset {
                let mut s = ScenarioConfig::preset((*kind).into());
                s.assisted = !unassisted;
                let name = format!(
                    "{}{}",
                    serde_json::to_value(s.kind).expect("kind serializes").as_str().unwrap_or("preset"),
                    if *unassisted { "_unassisted" } else { "" }
                );
                jobs.push((name, s));
            } else if scenarios.is_empty() {
                return Err(TwinError::invalid("sim run", "give scenario files or --preset"));
            }
            for path in scenarios {
                let text = fs::read_to_string(path).map_err(|e| TwinError::Io(format!("{}: {e}", path.display())))?;
                let s = ScenarioConfig::from_json(&text)
                    .map_err(|e| TwinError::invalid("scenario file", format!("{}: {e}", path.display())))?;
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_owned();
                jobs.push((stem, s));
            }
            let mut names: Vec<&str> = jobs.iter().map(|(n, _)| n.as_str()).collect();
            names.sort_unstable();
            if names.windows(2).any(|w| w[0] == w[1]) {
                return Err(TwinError::invalid("sim run", "scenario file names must be distinct"));
            }
            if let Some(seed) = ctx.seed {
                for (_, s) in &mut jobs {
                    s.seed = seed;
                }
            }
            let columns: Vec<&str> = if plot.is_empty() {
                DEFAULT_PLOT_COLUMNS.to_vec()
            } else {
                plot.iter().map(String::as_str).collect()
            };
            for c in &columns {
                column_getter(c)?;
            }
            sim_run(&ctx, &clutch, &jobs, *batch, if *no_plot { &[] } else { &columns })
        }
        Command::Report(ReportCmd::Discrepancies { json }) => report(&ctx, &clutch, *json),
    }
}

fn clutch_curve(clutch: &ClutchConfig, from: f64, to: f64, step: f64) -> Result<String> {
    if !(step > 0.0) {
        return Err(TwinError::invalid("step", "must be positive"));
    }
    if !(to >= from) {
        return Err(TwinError::invalid("sweep", "--to must not be below --from"));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let v = from + i as f64 * step;
        let f = clutch.peak_holding_force(v)?;
        let p = clutch.power_consumption(v)?;
        let ratio = if p > 0.0 { f / p } else { f64::INFINITY };
        // voltage and force round-trip exactly so the curve can be refitted
        rows.push(vec![exact(v), exact(f), sig6(p), sig6(ratio)]);
    }
    let mut buf = Vec::new();
    write_table(
        &mut buf,
        &["voltage_v", "peak_force_n", "power_w", "force_to_power_n_per_w"],
        rows,
    )?;
    Ok(to_string(buf))
}

#[derive(Serialize)]
struct FitSummary {
    degree: usize,
    v_max: f64,
    coefficients: Vec<f64>,
    rms_n: f64,
    max_abs_n: f64,
    r_squared: f64,
}

fn clutch_fit(ctx: &Ctx, input: &Path, degree: usize) -> Result<String> {
    let samples = csvio::read_characterization(open(input)?)?;
    let (model, report) = fit_force_voltage(&samples, degree)?;
    let coeffs = &model.coeffs()[..=degree];

    write_table(
        ctx.file("fit_residuals.csv")?,
        &["voltage_v", "peak_force_n", "residual_n"],
        samples
            .iter()
            .zip(&report.residuals)
            .map(|(&(v, f), &r)| vec![sig6(v), sig6(f), sig6(r)]),
    )?;
    let summary = FitSummary {
        degree,
        v_max: model.v_max(),
        coefficients: coeffs.to_vec(),
        rms_n: report.rms,
        max_abs_n: report.max_abs,
        r_squared: report.r_squared,
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| TwinError::Io(e.to_string()))?;
    json.push('\n');
    ctx.write_text("fit_report.json", &json)?;

    let mut buf = Vec::new();
    write_table(
        &mut buf,
        &["power", "coefficient"],
        coeffs.iter().enumerate().map(|(k, &c)| vec![k.to_string(), exact(c)]),
    )?;
    Ok(to_string(buf))
}

fn waveform(clutch: &ClutchConfig, a: &WaveformArgs) -> Result<String> {
    let profile = SwitchingProfile::new(
        a.vc,
        a.vt,
        a.switching.tau,
        a.switching.m,
        a.switching.mode.into(),
        clutch.force_model.v_max(),
    )?;
    let points = match a.t {
        Some(t) => vec![(t, profile.switching_voltage(t)?)],
        None => profile.sample_profile(a.dt)?,
    };
    let mut buf = Vec::new();
    write_table(
        &mut buf,
        &["t_s", "v_volts"],
        points.iter().map(|&(t, v)| vec![sig6(t), sig6(v)]),
    )?;
    Ok(to_string(buf))
}

fn support_force(ctx: &Ctx, clutch: &ClutchConfig, volts: &[f64]) -> Result<String> {
    let geom = &ctx.config.geometry;
    let mut rows = Vec::new();
    for &v in volts {
        rows.push(vec![sig6(v), "composed".to_owned(), sig6(geom.support_force(v, &clutch.force_model)?)]);
        rows.push(vec![sig6(v), "printed polynomial".to_owned(), sig6(printed_support_force(v))]);
        if v == 2.0 {
            rows.push(vec![sig6(v), "published claim".to_owned(), sig6(published::SUPPORT_CLAIM)]);
        }
    }
    let mut buf = Vec::new();
    write_table(&mut buf, &["voltage_v", "source", "support_force_n"], rows)?;
    Ok(to_string(buf))
}

fn control_trace(controller: &mut Controller, input: &Path, v_ref: f64, v_supply: f64) -> Result<String> {
    let samples = csvio::read_sensor_trace(open(input)?, v_ref)?;
    let mut rows = Vec::with_capacity(samples.len());
    for s in &samples {
        let cmd: Cmd = controller.update(s)?;
        let v = controller.supply.voltage(s.t);
        controller.supply.settle(s.t);
        let duty = pwm_duty(v.abs(), v_supply)?;
        rows.push((s.t, controller.state.mode.as_str(), cmd.as_str(), v, duty));
    }
    let mut buf = Vec::new();
    csvio::write_control_trace(&mut buf, &rows)?;
    Ok(to_string(buf))
}

struct ChannelMetrics {
    label: String,
    iemg: f64,
    rms: Vec<(f64, f64)>,
    mdf: Vec<(f64, f64)>,
}

fn analyze_channels(traces: &[EmgTrace], win: &AnalysisWindow, raw: bool) -> Result<Vec<ChannelMetrics>> {
    traces
        .iter()
        .map(|t| {
            let x = if raw { t.clone() } else { emg::bandpass(t)? };
            Ok(ChannelMetrics {
                label: t.label().to_owned(),
                iemg: emg::iemg(&x),
                rms: emg::rms_windowed(&x, win)?,
                mdf: emg::mdf(&x, win)?,
            })
        })
        .collect()
}

fn write_metric(ctx: &Ctx, name: &str, channels: &[ChannelMetrics], pick: fn(&ChannelMetrics) -> &[(f64, f64)]) -> Result<()> {
    let mut header = vec!["t_s"];
    header.extend(channels.iter().map(|c| c.label.as_str()));
    let n = channels.first().map(|c| pick(c).len()).unwrap_or(0);
    write_table(
        ctx.file(name)?,
        &header,
        (0..n).map(|i| {
            let mut row = vec![sig6(pick(&channels[0])[i].0)];
            row.extend(channels.iter().map(|c| sig6(pick(c)[i].1)));
            row
        }),
    )
}

fn emg_analyze(ctx: &Ctx, input: &Path, baseline: Option<&Path>, win: &AnalysisWindow, raw: bool) -> Result<String> {
    let traces = csvio::read_emg(open(input)?)?;
    let channels = analyze_channels(&traces, win, raw)?;
    let reference = match baseline {
        Some(p) => {
            let base = csvio::read_emg(open(p)?)?;
            Some(analyze_channels(&base, win, raw)?)
        }
        None => None,
    };
    write_metric(ctx, "emg_rms.csv", &channels, |c| &c.rms)?;
    write_metric(ctx, "emg_mdf.csv", &channels, |c| &c.mdf)?;

    let mut header = vec!["channel", "iemg_mv_s", "mean_rms_mv", "mean_mdf_hz", "mdf_slope_hz_per_s"];
    if reference.is_some() {
        header.push("iemg_reduction_percent");
    }
    let mut rows = Vec::new();
    for c in &channels {
        let rms: Vec<f64> = c.rms.iter().map(|p| p.1).collect();
        let mdf: Vec<f64> = c.mdf.iter().map(|p| p.1).collect();
        let mut row = vec![
            c.label.clone(),
            sig6(c.iemg),
            sig6(emg::mean(&rms).unwrap_or(f64::NAN)),
            sig6(emg::mean(&mdf).unwrap_or(f64::NAN)),
            sig6(emg::linear_slope(&c.mdf).unwrap_or(f64::NAN)),
        ];
        if let Some(base) = &reference {
            let b = base.iter().find(|b| b.label == c.label).ok_or_else(|| {
                TwinError::invalid("baseline", format!("no channel labelled '{}'", c.label))
            })?;
            row.push(sig6(emg::reduction_percent(b.iemg, c.iemg)?));
        }
        rows.push(row);
    }
    let mut buf = Vec::new();
    write_table(&mut buf, &header, rows)?;
    Ok(to_string(buf))
}

fn column_getter(name: &str) -> Result<fn(&SimRecord) -> f64> {
    Ok(match name {
        "s1_volts" => |r| r.s1,
        "s2_volts" => |r| r.s2,
        "v_cmd_volts" => |r| r.v_cmd,
        "duty" => |r| r.duty,
        "i_coil_a" => |r| r.i_coil,
        "f_clutch_n" => |r| r.f_clutch,
        "f_support_n" => |r| r.f_support,
        "f_required_n" => |r| r.f_required,
        "f_muscle_residual_n" => |r| r.f_muscle_residual,
        "p_clutch_w" => |r| r.p_clutch,
        _ => return Err(TwinError::invalid("plot column", format!("'{name}' is not a numeric SimLog column"))),
    })
}

fn sim_run(
    ctx: &Ctx,
    clutch: &ClutchConfig,
    jobs: &[(String, ScenarioConfig)],
    batch: bool,
    columns: &[&str],
) -> Result<String> {
    let geom = &ctx.config.geometry;
    let thr = &ctx.config.thresholds;
    let scenarios: Vec<ScenarioConfig> = jobs.iter().map(|(_, s)| s.clone()).collect();
    let logs: Vec<Result<SimLog>> = if batch {
        run_batch(&scenarios, clutch, geom, thr)
    } else {
        scenarios.iter().map(|s| run_scenario(s, clutch, geom, thr)).collect()
    };

    let mut rows = Vec::new();
    for ((name, scenario), log) in jobs.iter().zip(logs) {
        let log = log.map_err(|e| TwinError::invalid("scenario", format!("{name}: {e}")))?;
        csvio::write_simlog(ctx.file(&format!("{name}.csv"))?, &log)?;
        if !columns.is_empty() {
            let data: Vec<Vec<(f64, f64)>> = columns
                .iter()
                .map(|c| {
                    let get = column_getter(c).expect("columns checked before the run");
                    log.records.iter().map(|r| (r.t, get(r))).collect()
                })
                .collect();
            let series: Vec<Series> = columns
                .iter()
                .zip(&data)
                .map(|(c, d)| Series { name: c, points: d })
                .collect();
            ctx.write_text(&format!("{name}.svg"), &line_plot(name, "t (s)", "", &series))?;
        }
        let held = scenario.held_intervals();
        let (t0, t1) = held.first().copied().unwrap_or((0.0, scenario.duration));
        let mean_residual = log.mean_over(t0, t1, |r| r.f_muscle_residual).unwrap_or(0.0);
        let peak_residual = log.records.iter().map(|r| r.f_muscle_residual).fold(0.0, f64::max);
        let mean_support = log.mean_over(t0, t1, |r| r.f_support).unwrap_or(0.0);
        rows.push(vec![
            name.clone(),
            log.records.len().to_string(),
            sig6(mean_residual),
            sig6(peak_residual),
            sig6(mean_support),
            log.saturated_steps.to_string(),
        ]);
    }
    let mut buf = Vec::new();
    write_table(
        &mut buf,
        &[
            "scenario",
            "steps",
            "mean_held_residual_n",
            "peak_residual_n",
            "mean_held_support_n",
            "saturated_steps",
        ],
        rows,
    )?;
    Ok(to_string(buf))
}

fn report(ctx: &Ctx, clutch: &ClutchConfig, json: bool) -> Result<String> {
    let ledger = discrepancies(clutch, &ctx.config.geometry)?;
    if json {
        let mut text = serde_json::to_string_pretty(&ledger).map_err(|e| TwinError::Io(e.to_string()))?;
        text.push('\n');
        return Ok(text);
    }
    let mut rows = Vec::new();
    for d in &ledger {
        for v in &d.values {
            rows.push(vec![
                d.id.clone(),
                v.label.clone(),
                sig6(v.value),
                sig6(d.rel_spread),
                sig6(d.tolerance),
                if d.flagged { "yes" } else { "no" }.to_owned(),
            ]);
        }
    }
    let mut buf = Vec::new();
    write_table(
        &mut buf,
        &["id", "label", "value", "rel_spread", "tolerance", "flagged"],
        rows,
    )?;
    Ok(to_string(buf))
}
