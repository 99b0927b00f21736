mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Push-recovery analysis toolkit: sensor ingest, smoothing, balance models
/// and gait analytics.
#[derive(Debug, Parser)]
#[command(name = "pushrec", version, about)]
pub struct Cli {
    /// TOML defaults file (falls back to $PUSHREC_CONFIG)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert raw-count trial files to physical units
    Ingest(IngestArgs),
    /// Smooth every column of a table against its time column
    Smooth(SmoothArgs),
    /// Push a CoM pendulum and classify recovery; optionally run joint-level recovery
    Simulate(SimulateArgs),
    /// Deviation, asymmetry and handedness report over one or more trials
    Analyze(AnalyzeArgs),
    /// Generate a seeded synthetic raw trial
    Synth(SynthArgs),
    /// Render a phase, trial or table file as SVG
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw trial file or directory of *.csv files
    pub input: PathBuf,
    /// Output file (stdout if absent) or directory
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Leading samples averaged for zero correction [default: 10]
    #[arg(long)]
    pub rest_window: Option<usize>,
    /// Degrees per count [default: 300/999]
    #[arg(long)]
    pub angle_scale: Option<f64>,
    /// Accelerometer full scale in g [default: 16]
    #[arg(long)]
    pub accel_full_scale: Option<f64>,
    /// Gyroscope full scale in deg/s [default: 2000]
    #[arg(long)]
    pub gyro_full_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    /// Table or converted trial file, or a directory of *.csv files
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// `spline`, `poly` or `poly:<degree>` [default: spline]
    #[arg(long)]
    pub method: Option<String>,
    /// Resample onto a uniform grid at this rate (Hz)
    #[arg(long)]
    pub resample: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Directory receiving phase.csv, boundary.csv, phase.svg and report.json
    #[arg(short, long)]
    pub out_dir: PathBuf,
    /// Subject height, m [default: 1.70]
    #[arg(long)]
    pub height: Option<f64>,
    /// Subject mass, kg [default: 70]
    #[arg(long)]
    pub mass: Option<f64>,
    /// Pendulum height, m [default: 0.57 × height]
    #[arg(long)]
    pub z0: Option<f64>,
    /// m/s² [default: 9.8]
    #[arg(long)]
    pub gravity: Option<f64>,
    /// Heel-side CoP limit, m [default: -0.05]
    #[arg(long, allow_hyphen_values = true)]
    pub cop_min: Option<f64>,
    /// Toe-side CoP limit, m [default: 0.15]
    #[arg(long, allow_hyphen_values = true)]
    pub cop_max: Option<f64>,
    /// Initial CoM position, m [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Initial CoM velocity, m/s [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub xdot0: Option<f64>,
    /// Push impulse, N·s [default: 10]
    #[arg(long, allow_hyphen_values = true)]
    pub impulse: Option<f64>,
    /// `fixed[:<p>]`, `capture` or `bang-bang` [default: capture]
    #[arg(long)]
    pub controller: Option<String>,
    /// s [default: 0.001]
    #[arg(long)]
    pub dt: Option<f64>,
    /// s [default: 3]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Stop once the CoM is this far from the foot midpoint, m [default: 1]
    #[arg(long)]
    pub escape_radius: Option<f64>,
    /// Samples along the boundary line [default: 101]
    #[arg(long)]
    pub boundary_points: Option<usize>,
    /// Also run joint-level recovery on the subject's anthropometric chain
    #[arg(long)]
    pub recovery: bool,
    /// Link-chain file for joint-level recovery (implies --recovery)
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Initial ankle perturbation, rad [default: 0.05]
    #[arg(long, allow_hyphen_values = true)]
    pub perturbation: Option<f64>,
    /// Proportional gain, N·m/rad [default: 2000]
    #[arg(long)]
    pub kp: Option<f64>,
    /// Derivative gain, N·m·s/rad [default: 400]
    #[arg(long)]
    pub kd: Option<f64>,
    /// s [default: 0.001]
    #[arg(long)]
    pub recovery_dt: Option<f64>,
    /// s [default: 2]
    #[arg(long)]
    pub recovery_t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trial files or directories; all raw or all converted
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Report path (stdout if absent)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Zero-correction window for raw inputs, samples [default: 10]
    #[arg(long)]
    pub rest_window: Option<usize>,
    /// Degrees per count for raw inputs [default: 300/999]
    #[arg(long)]
    pub angle_scale: Option<f64>,
    /// Pre-push baseline window, s [default: 0.8]
    #[arg(long)]
    pub baseline_window: Option<f64>,
    /// Gait cycle duration for dynamic trials, s [default: 1]
    #[arg(long)]
    pub cycle_duration: Option<f64>,
    /// Ideal hip amplitude, deg [default: 20]
    #[arg(long)]
    pub hip_amplitude: Option<f64>,
    /// Ideal knee amplitude, deg [default: 60]
    #[arg(long)]
    pub knee_amplitude: Option<f64>,
    /// Ideal ankle amplitude, deg [default: 15]
    #[arg(long)]
    pub ankle_amplitude: Option<f64>,
    /// Handedness weight on the hip index [default: 0.3]
    #[arg(long)]
    pub weight_hip: Option<f64>,
    /// Handedness weight on the knee index [default: 0.5]
    #[arg(long)]
    pub weight_knee: Option<f64>,
    /// Handedness weight on the ankle index [default: 0.2]
    #[arg(long)]
    pub weight_ankle: Option<f64>,
    /// Aggregate asymmetry needed for a verdict [default: 0.1]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Left-foot force file (`t,force_N`) for CoP asymmetry
    #[arg(long, requires = "right_force")]
    pub left_force: Option<PathBuf>,
    /// Right-foot force file (`t,force_N`)
    #[arg(long, requires = "left_force")]
    pub right_force: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output file (stdout if absent); a directory with --all-conditions
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write one file per push condition into the output directory
    #[arg(long)]
    pub all_conditions: bool,
    /// [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gaussian count noise, RMS counts [default: 1]
    #[arg(long)]
    pub noise: Option<f64>,
    /// s [default: 4]
    #[arg(long)]
    pub duration: Option<f64>,
    /// Hz [default: 100]
    #[arg(long)]
    pub rate: Option<f64>,
    /// s [default: 1]
    #[arg(long)]
    pub cycle_duration: Option<f64>,
    /// Push onset, s [default: 1]
    #[arg(long)]
    pub onset: Option<f64>,
    /// N·s [default: 20]
    #[arg(long, allow_hyphen_values = true)]
    pub impulse: Option<f64>,
    /// Knee-versus-ankle emphasis in [-1, 1] [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub strategy: Option<f64>,
    /// [default: S00]
    #[arg(long)]
    pub subject_id: Option<String>,
    /// m [default: 1.70]
    #[arg(long)]
    pub height: Option<f64>,
    /// kg [default: 70]
    #[arg(long)]
    pub weight: Option<f64>,
    /// male | female [default: male]
    #[arg(long)]
    pub sex: Option<String>,
    /// left | right | unknown [default: right]
    #[arg(long)]
    pub handedness: Option<String>,
    /// [default: 25]
    #[arg(long)]
    pub age: Option<f64>,
    /// open | closed [default: closed]
    #[arg(long)]
    pub eyes: Option<String>,
    /// with | without [default: without]
    #[arg(long)]
    pub lunging: Option<String>,
    /// static | dynamic [default: static]
    #[arg(long)]
    pub stance: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// phase.csv, raw or converted trial, or any numeric table
    pub input: PathBuf,
    /// SVG output path
    #[arg(short, long)]
    pub output: PathBuf,
    /// Boundary parameters for phase plots; same defaults as `simulate`
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub z0: Option<f64>,
    #[arg(long)]
    pub gravity: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub cop_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub cop_max: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pushrec: {f}");
            f.exit_code()
        }
    }
}
