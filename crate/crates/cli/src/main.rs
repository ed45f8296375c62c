//! `mrhe`: command-line front end for the MR hand exoskeleton twin.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrhe_core::sim::ScenarioKind;
use mrhe_core::waveform::SwitchingMode;

#[derive(Debug, Parser)]
#[command(name = "mrhe", version, about = "MR grease clutch hand exoskeleton digital twin")]
pub struct Cli {
    /// JSON file overriding clutch, linkage, and threshold parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for manifests, logs, and plots (env: MRHE_OUT_DIR).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Seed for stochastic steps; overrides scenario-file seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clutch holding-force curve and polynomial fitting.
    #[command(subcommand)]
    Clutch(ClutchCmd),
    /// Samples of a soft-switching supply transition.
    Waveform(WaveformArgs),
    /// Linkage statics.
    #[command(subcommand)]
    Kinetics(KineticsCmd),
    /// Grip-intent latch.
    #[command(subcommand)]
    Control(ControlCmd),
    /// sEMG metrics.
    #[command(subcommand)]
    Emg(EmgCmd),
    /// Scenario simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Published figures checked against recomputed values.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Subcommand)]
pub enum ClutchCmd {
    /// CSV of voltage, peak holding force, power, and force-to-power ratio.
    Curve {
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 3.0)]
        to: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Least-squares polynomial fit of a characterization CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        degree: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    AsPrinted,
    BoundaryConsistent,
}

impl From<ModeArg> for SwitchingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::AsPrinted => SwitchingMode::AsPrinted,
            ModeArg::BoundaryConsistent => SwitchingMode::BoundaryConsistent,
        }
    }
}

#[derive(Debug, Args)]
pub struct SwitchingArgs {
    #[arg(long, value_enum, default_value = "boundary-consistent")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = mrhe_core::waveform::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long, default_value_t = mrhe_core::waveform::DEFAULT_PERIODS)]
    pub m: u32,
}

#[derive(Debug, Args)]
pub struct WaveformArgs {
    #[command(flatten)]
    pub switching: SwitchingArgs,
    /// Voltage before the transition.
    #[arg(long, allow_negative_numbers = true)]
    pub vc: f64,
    /// Voltage after the transition.
    #[arg(long)]
    pub vt: f64,
    /// Single sample time; omit for a full sweep.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Subcommand)]
pub enum KineticsCmd {
    /// Whole-hand support force at the given supply voltages.
    SupportForce {
        #[arg(long, required = true, num_args = 1..)]
        volts: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ControlCmd {
    /// Run the latch over a sensor CSV.
    Trace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = mrhe_core::control::DEFAULT_V_ON)]
        v_on: f64,
        #[arg(long, default_value_t = mrhe_core::control::DEFAULT_V_REF)]
        v_ref: f64,
        #[arg(long, default_value_t = mrhe_core::control::DEFAULT_V_SUPPLY)]
        v_supply: f64,
        #[command(flatten)]
        switching: SwitchingArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum EmgCmd {
    /// RMS, MDF, and iEMG per channel of an EMG CSV.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Reference recording; adds per-channel iEMG reduction against it.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Analysis window length in seconds.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        /// Skip the 100-400 Hz band-pass stage.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresetArg {
    StaticGrip,
    Carry,
    Lift,
}

impl From<PresetArg> for ScenarioKind {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::StaticGrip => ScenarioKind::StaticGrip,
            PresetArg::Carry => ScenarioKind::Carry,
            PresetArg::Lift => ScenarioKind::Lift,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Run scenario files (or a preset) to SimLog CSVs and plots.
    Run {
        /// Scenario JSON files.
        scenarios: Vec<PathBuf>,
        /// Run a built-in scenario instead of files.
        #[arg(long, value_enum, conflicts_with = "scenarios")]
        preset: Option<PresetArg>,
        /// With --preset: run without the exoskeleton.
        #[arg(long, requires = "preset")]
        unassisted: bool,
        /// Run the scenarios in parallel.
        #[arg(long)]
        batch: bool,
        /// SimLog columns to plot against time.
        #[arg(long = "plot")]
        plot: Vec<String>,
        #[arg(long)]
        no_plot: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Ledger of published figures versus recomputed values.
    Discrepancies {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprint!("{}", e.render());
                return ExitCode::from(2);
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let reason = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("usage error: {reason}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli, &argv[1..]) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
