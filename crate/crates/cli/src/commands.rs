use std::fs;
use std::path::{Path, PathBuf};

use pushrec_core::analysis::{analyze_documents, parse_force_csv, AnalysisConfig};
use pushrec_core::dynamics::{
    integrate, parse_chain, recovery_torque, trajectory_csv, Gains, JointState, LinkChain,
};
use pushrec_core::gait::{ideal_gait, GaitAmplitudes, HandednessWeights, PushSpec, SynthOptions};
use pushrec_core::ingest::{
    ingest, is_converted, parse_converted, parse_trial, ConversionConfig, PushCondition,
    SubjectMeta,
};
use pushrec_core::lipm::{
    boundary_csv, decision_boundary, phase_csv, phase_trajectory, CopController, FootGeometry,
    LipmParams, LipmSample, PhasePoint, SimOptions, Verdict, DEFAULT_Z0_FRACTION,
};
use pushrec_core::pipeline::{ingest_text, smooth_text, synth_text};
use pushrec_core::plot::{joint_plot_svg, line_plot_svg, phase_plot_svg, PlotSeries};
use pushrec_core::smoothing::Smoother;
use pushrec_core::table::parse_table;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, Config};
use crate::failure::Failure;
use crate::{AnalyzeArgs, Cli, Command, IngestArgs, PlotArgs, SimulateArgs, SmoothArgs, SynthArgs};

/// Settled when every joint stays within this many radians of the reference.
const SETTLE_TOLERANCE: f64 = 0.005;

pub fn run(cli: Cli) -> Result<(), Failure> {
    let config = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a, &config),
        Command::Smooth(a) => cmd_smooth(a, &config),
        Command::Simulate(a) => cmd_simulate(a, &config),
        Command::Analyze(a) => cmd_analyze(a, &config),
        Command::Synth(a) => cmd_synth(a, &config),
        Command::Plot(a) => cmd_plot(a, &config),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::Data(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_flag<T: std::str::FromStr<Err = String>>(name: &str, value: &str) -> Result<T, Failure> {
    value
        .parse()
        .map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

/// `*.csv` files directly inside `dir`, sorted by name.
fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Apply a text transform to one file, or to every `*.csv` in a directory in
/// parallel. The first failure in file-name order is reported.
fn map_files<F>(input: &Path, output: Option<&Path>, f: F) -> Result<(), Failure>
where
    F: Fn(&str) -> Result<String, Failure> + Sync,
{
    if !input.is_dir() {
        let text = f(&read(input)?).map_err(|e| e.context(input.display()))?;
        return emit(output, &text);
    }
    let out_dir =
        output.ok_or_else(|| Failure::Usage("a directory input needs --output <DIR>".into()))?;
    let files = csv_files(input)?;
    if files.is_empty() {
        return Err(Failure::Data(format!(
            "{}: no *.csv files",
            input.display()
        )));
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::Data(format!("{}: {e}", out_dir.display())))?;
    let results: Vec<Result<(), Failure>> = files
        .par_iter()
        .map(|path| {
            let text = f(&read(path)?).map_err(|e| e.context(path.display()))?;
            write(
                &out_dir.join(path.file_name().expect("listed files have names")),
                &text,
            )
        })
        .collect();
    results.into_iter().collect()
}

fn cmd_ingest(a: IngestArgs, config: &Config) -> Result<(), Failure> {
    let d = &config.ingest;
    let rest_window = a.rest_window.unwrap_or(d.rest_window);
    let conversion = ConversionConfig {
        angle_scale: a.angle_scale.unwrap_or(d.angle_scale),
        accel_full_scale_g: a.accel_full_scale.unwrap_or(d.accel_full_scale_g),
        gyro_full_scale_dps: a.gyro_full_scale.unwrap_or(d.gyro_full_scale_dps),
    };
    map_files(&a.input, a.output.as_deref(), |text| {
        Ok(ingest_text(text, rest_window, &conversion)?)
    })
}

fn cmd_smooth(a: SmoothArgs, config: &Config) -> Result<(), Failure> {
    let method: Smoother = parse_flag(
        "method",
        a.method.as_deref().unwrap_or(&config.smooth.method),
    )?;
    let resample = a.resample.or(config.smooth.resample);
    map_files(&a.input, a.output.as_deref(), |text| {
        Ok(smooth_text(text, method, resample)?)
    })
}

#[derive(Serialize)]
struct SimulationReport {
    report_version: u32,
    pendulum: LipmParams,
    foot: FootGeometry,
    initial: PhasePoint,
    impulse: f64,
    post_push: PhasePoint,
    controller: String,
    verdict: Verdict,
    capture_point: f64,
    boundary_margin: f64,
    escape_time: Option<f64>,
    samples: usize,
    recovery: Option<RecoverySummary>,
}

#[derive(Serialize)]
struct RecoverySummary {
    links: usize,
    perturbation: f64,
    kp: f64,
    kd: f64,
    final_max_abs_angle: f64,
    settle_time: Option<f64>,
    settle_tolerance: f64,
}

fn lipm_setup(
    height: Option<f64>,
    mass: f64,
    z0: Option<f64>,
    gravity: Option<f64>,
    cop_min: Option<f64>,
    cop_max: Option<f64>,
    config: &Config,
) -> Result<(LipmParams, FootGeometry), Failure> {
    let d = &config.simulate;
    let height = height.unwrap_or(d.height);
    let z0 = z0.or(d.z0).unwrap_or(DEFAULT_Z0_FRACTION * height);
    let params = LipmParams::new(gravity.unwrap_or(d.gravity), z0, mass)?;
    let foot = FootGeometry::new(cop_min.unwrap_or(d.cop_min), cop_max.unwrap_or(d.cop_max))?;
    Ok((params, foot))
}

fn cmd_simulate(a: SimulateArgs, config: &Config) -> Result<(), Failure> {
    let d = &config.simulate;
    let mass = a.mass.unwrap_or(d.mass);
    let (params, foot) = lipm_setup(
        a.height, mass, a.z0, a.gravity, a.cop_min, a.cop_max, config,
    )?;
    let controller_text = a.controller.clone().unwrap_or_else(|| d.controller.clone());
    let controller: CopController = parse_flag("controller", &controller_text)?;
    let options = SimOptions {
        dt: a.dt.unwrap_or(d.dt),
        t_end: a.t_end.unwrap_or(d.t_end),
        escape_radius: a.escape_radius.unwrap_or(d.escape_radius),
    };
    let initial = PhasePoint::new(a.x0.unwrap_or(d.x0), a.xdot0.unwrap_or(d.xdot0));
    let impulse = a.impulse.unwrap_or(d.impulse);
    let report = phase_trajectory(&params, &foot, initial, impulse, controller, &options)?;
    let boundary = decision_boundary(&params, &foot);
    let post_push = report.trajectory[0].point();

    let recovery = if a.recovery || a.chain.is_some() {
        let chain = match &a.chain {
            Some(path) => {
                parse_chain(&read(path)?).map_err(|e| Failure::from(e).context(path.display()))?
            }
            None => LinkChain::anthropometric(a.height.unwrap_or(d.height), mass),
        };
        let (summary, csv) = joint_recovery(&chain, &a, config)?;
        write(&a.out_dir.join("trajectory.csv"), &csv)?;
        Some(summary)
    } else {
        None
    };

    let points = a.boundary_points.unwrap_or(d.boundary_points);
    let x_lo = foot.cop_min - 0.3;
    let x_hi = foot.cop_max + 0.3;
    write(&a.out_dir.join("phase.csv"), &phase_csv(&report.trajectory))?;
    write(
        &a.out_dir.join("boundary.csv"),
        &boundary_csv(&boundary, x_lo, x_hi, points),
    )?;
    write(
        &a.out_dir.join("phase.svg"),
        &phase_plot_svg(&report.trajectory, &boundary),
    )?;
    let summary = SimulationReport {
        report_version: 1,
        pendulum: params,
        foot,
        initial,
        impulse,
        post_push,
        controller: controller_text,
        verdict: report.verdict,
        capture_point: report.capture_point,
        boundary_margin: report.boundary_margin,
        escape_time: report.escape_time,
        samples: report.trajectory.len(),
        recovery,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("report serializes");
    json.push('\n');
    write(&a.out_dir.join("report.json"), &json)?;
    println!(
        "{} (capture point {:.4} m, margin {:.4} m/s)",
        report.verdict, report.capture_point, report.boundary_margin
    );
    Ok(())
}

fn joint_recovery(
    chain: &LinkChain,
    a: &SimulateArgs,
    config: &Config,
) -> Result<(RecoverySummary, String), Failure> {
    let d = &config.simulate;
    let n = chain.dof();
    let perturbation = a.perturbation.unwrap_or(d.perturbation);
    let kp = a.kp.unwrap_or(d.kp);
    let kd = a.kd.unwrap_or(d.kd);
    if !(kp >= 0.0 && kd >= 0.0) {
        return Err(Failure::Usage("gains must be non-negative".into()));
    }
    let gains = Gains::uniform(n, kp, kd);
    let reference = JointState::rest(n);
    let mut initial = JointState::rest(n);
    initial.theta[0] = perturbation;
    let torque = |_t: f64, s: &JointState| {
        recovery_torque(chain, s, &reference, &gains)
            .unwrap_or_else(|_| pushrec_core::dynamics::TorqueVector::from_element(n, f64::NAN))
    };
    let traj = integrate(
        chain,
        &initial,
        torque,
        a.recovery_dt.unwrap_or(d.recovery_dt),
        a.recovery_t_end.unwrap_or(d.recovery_t_end),
    )?;
    let max_abs = |s: &pushrec_core::dynamics::TrajectorySample| s.theta.amax();
    let settle_time = traj
        .iter()
        .rposition(|s| max_abs(s) > SETTLE_TOLERANCE)
        .map_or(Some(0.0), |i| traj.get(i + 1).map(|s| s.t));
    let summary = RecoverySummary {
        links: n,
        perturbation,
        kp,
        kd,
        final_max_abs_angle: traj.last().map_or(0.0, max_abs),
        settle_time,
        settle_tolerance: SETTLE_TOLERANCE,
    };
    Ok((summary, trajectory_csv(&traj)))
}

fn analysis_config(a: &AnalyzeArgs, config: &Config) -> Result<AnalysisConfig, Failure> {
    let d = &config.analyze;
    let amplitudes = GaitAmplitudes {
        hip: a.hip_amplitude.unwrap_or(d.hip_amplitude),
        knee: a.knee_amplitude.unwrap_or(d.knee_amplitude),
        ankle: a.ankle_amplitude.unwrap_or(d.ankle_amplitude),
    };
    let baseline_window_s = a.baseline_window.unwrap_or(d.baseline_window);
    if !(baseline_window_s.is_finite() && baseline_window_s > 0.0) {
        return Err(Failure::Usage("--baseline-window must be positive".into()));
    }
    Ok(AnalysisConfig {
        rest_window: a.rest_window.unwrap_or(d.rest_window),
        conversion: ConversionConfig {
            angle_scale: a.angle_scale.unwrap_or(d.angle_scale),
            ..ConversionConfig::default()
        },
        baseline_window_s,
        gait: ideal_gait(a.cycle_duration.unwrap_or(d.cycle_duration), amplitudes)?,
        weights: HandednessWeights {
            hip: a.weight_hip.unwrap_or(d.weight_hip),
            knee: a.weight_knee.unwrap_or(d.weight_knee),
            ankle: a.weight_ankle.unwrap_or(d.weight_ankle),
        },
        threshold: a.threshold.unwrap_or(d.threshold),
    })
}

fn cmd_analyze(a: AnalyzeArgs, config: &Config) -> Result<(), Failure> {
    let settings = analysis_config(&a, config)?;
    let mut paths = Vec::new();
    for input in &a.inputs {
        if input.is_dir() {
            paths.extend(csv_files(input)?);
        } else {
            paths.push(input.clone());
        }
    }
    let documents = paths
        .par_iter()
        .map(|p| Ok((p.display().to_string(), read(p)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let forces = match (&a.left_force, &a.right_force) {
        (Some(l), Some(r)) => Some((
            parse_force_csv(&read(l)?).map_err(|e| Failure::from(e).context(l.display()))?,
            parse_force_csv(&read(r)?).map_err(|e| Failure::from(e).context(r.display()))?,
        )),
        _ => None,
    };
    let report = analyze_documents(&documents, &settings, forces.as_ref().map(|(l, r)| (l, r)))?;
    emit(a.output.as_deref(), &report.to_json())
}

fn cmd_synth(a: SynthArgs, config: &Config) -> Result<(), Failure> {
    let d = &config.synth;
    let meta = SubjectMeta {
        id: a.subject_id.clone().unwrap_or_else(|| d.subject_id.clone()),
        height: a.height.unwrap_or(d.height),
        weight: a.weight.unwrap_or(d.weight),
        sex: parse_flag("sex", a.sex.as_deref().unwrap_or(&d.sex))?,
        handedness: parse_flag(
            "handedness",
            a.handedness.as_deref().unwrap_or(&d.handedness),
        )?,
        age: a.age.unwrap_or(d.age),
    };
    let condition = PushCondition {
        eyes: parse_flag("eyes", a.eyes.as_deref().unwrap_or(&d.eyes))?,
        lunging: parse_flag("lunging", a.lunging.as_deref().unwrap_or(&d.lunging))?,
        stance: parse_flag("stance", a.stance.as_deref().unwrap_or(&d.stance))?,
    };
    let push = PushSpec {
        onset: a.onset.unwrap_or(d.onset),
        impulse: a.impulse.unwrap_or(d.impulse),
    };
    let options = SynthOptions {
        seed: a.seed.unwrap_or(d.seed),
        duration: a.duration.unwrap_or(d.duration),
        rate: a.rate.unwrap_or(d.rate),
        cycle_duration: a.cycle_duration.unwrap_or(d.cycle_duration),
        amplitudes: GaitAmplitudes::default(),
        strategy: a.strategy.unwrap_or(d.strategy),
    };
    let noise = a.noise.unwrap_or(d.noise);
    if !a.all_conditions {
        return emit(
            a.output.as_deref(),
            &synth_text(&meta, condition, push, noise, &options)?,
        );
    }
    let dir = a
        .output
        .as_deref()
        .ok_or_else(|| Failure::Usage("--all-conditions needs --output <DIR>".into()))?;
    for (k, c) in PushCondition::all().into_iter().enumerate() {
        let opts = SynthOptions {
            seed: options.seed.wrapping_add(k as u64),
            ..options
        };
        let text = synth_text(&meta, c, push, noise, &opts)?;
        write(&dir.join(format!("{}_{}.csv", meta.id, c.label())), &text)?;
    }
    Ok(())
}

fn phase_samples(text: &str) -> Result<Vec<LipmSample>, Failure> {
    let table = parse_table(text)?;
    Ok(table
        .rows
        .iter()
        .map(|r| LipmSample {
            t: r[0],
            x: r[1],
            xdot: r[2],
            p: r[3],
        })
        .collect())
}

fn cmd_plot(a: PlotArgs, config: &Config) -> Result<(), Failure> {
    let text = read(&a.input)?;
    let header = text.lines().next().unwrap_or("").trim();
    let svg = if header == "t,x,xdot,p" {
        let (params, foot) = lipm_setup(
            a.height,
            config.simulate.mass,
            a.z0,
            a.gravity,
            a.cop_min,
            a.cop_max,
            config,
        )?;
        phase_plot_svg(&phase_samples(&text)?, &decision_boundary(&params, &foot))
    } else if is_converted(&text) {
        joint_plot_svg(&parse_converted(&text)?)
    } else if let Ok(raw) = parse_trial(&text) {
        let d = &config.ingest;
        let conversion = ConversionConfig {
            angle_scale: d.angle_scale,
            accel_full_scale_g: d.accel_full_scale_g,
            gyro_full_scale_dps: d.gyro_full_scale_dps,
        };
        joint_plot_svg(&ingest(&raw, d.rest_window, &conversion)?)
    } else {
        let table = parse_table(&text)?;
        let t = table.column(0);
        let series: Vec<PlotSeries> = (1..table.columns.len())
            .map(|k| PlotSeries::new(table.columns[k].clone(), t.clone(), table.column(k)))
            .collect();
        let name = a
            .input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        line_plot_svg(&name, &table.columns[0], "value", &series)
    };
    write(&a.output, &svg)
}
