use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use heliquad::config::{self, GainsConfig, GeometryConfig, MechanismConfig, VehicleConfig};
use heliquad::{aero, logcsv, mission, model};
use heliquad_core::harness::{compute_metrics, run_mission, MetricWindows, SimConfig, SimModels};
use heliquad_core::mechanism::{
    dwell_points, forward_pitch, inverse_pitch, pose, servo_torque, singular_pitch, MechanismParams, ServoPwmMap,
};
use heliquad_core::nn::{nn1_dataset, nn2_dataset, train_mlp, TrainConfig};
use heliquad_core::propeller::{
    generate_actuator_dataset, rotor_solve, zero_thrust_pitch, AirfoilModel, BladeGeometry, DatasetRow, DatasetSweep,
    OperatingPoint, RotorMap, RHO_DEFAULT, RPM_TO_RAD_S,
};

#[derive(Parser)]
#[command(name = "heliquad", version, about = "Variable-pitch quadcopter analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pitch mechanism kinematics.
    Mech {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(subcommand)]
        action: MechAction,
    },
    /// Rotor aerodynamics.
    Prop {
        #[arg(long)]
        geom: Option<PathBuf>,
        /// `builtin`, `symmetric` or a polar CSV.
        #[arg(long, default_value = "builtin")]
        polar: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(subcommand)]
        action: PropAction,
    },
    /// Fit an allocation network to a rotor table.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        net: Net,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fly a mission script and write the log.
    Sim {
        #[arg(long)]
        vehicle: Option<PathBuf>,
        #[arg(long)]
        mech: Option<PathBuf>,
        #[arg(long)]
        geom: Option<PathBuf>,
        #[arg(long, default_value = "builtin")]
        polar: String,
        #[arg(long)]
        gains: Option<PathBuf>,
        /// Trained speed network; trained in place when omitted.
        #[arg(long)]
        nn1: Option<PathBuf>,
        #[arg(long)]
        nn2: Option<PathBuf>,
        #[arg(long)]
        mission: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed of the synthetic dataset used when a network file is omitted.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Tracking metrics of a log.
    Metrics {
        #[arg(long)]
        log: PathBuf,
        /// `start-end[,start-end...]` in seconds, or `all`.
        #[arg(long, default_value = "all")]
        windows: String,
        /// Seconds excluded after each sigma or mu change.
        #[arg(long, default_value_t = 3.0)]
        transient: f64,
    },
}

#[derive(Subcommand)]
enum MechAction {
    /// CSV of pulse width, crank angle and pitch.
    IoCurve {
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Singular pitch and dwell points.
    Singularities,
    /// CSV of servo torque over the crank range for a propeller moment.
    ServoTorque {
        #[arg(long, allow_hyphen_values = true)]
        moment: f64,
        #[arg(long, default_value_t = 181)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum PropAction {
    /// Rotor loads over pitch and speed.
    Sweep {
        #[arg(long, default_value_t = -30.0, allow_hyphen_values = true)]
        pitch_min: f64,
        #[arg(long, default_value_t = 30.0)]
        pitch_max: f64,
        #[arg(long, default_value_t = 1.0)]
        pitch_step: f64,
        #[arg(long, value_delimiter = ',', default_value = "3000,6000,9000,12000,15000")]
        rpm: Vec<f64>,
    },
    /// Pitch of zero thrust at a speed.
    ZeroThrust {
        #[arg(long)]
        rpm: f64,
    },
    /// Synthetic load-cell table: 16 pitches by rows/16 random speeds.
    Dataset {
        #[arg(long, default_value_t = 320)]
        rows: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Net {
    Nn1,
    Nn2,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    config::load(path.as_deref()).with_context(|| format!("reading {}", path.as_deref().map_or("".into(), |p| p.display().to_string())))
}

fn mechanism(params: &Option<PathBuf>) -> Result<(MechanismParams, ServoPwmMap)> {
    let c: MechanismConfig = load_config(params)?;
    Ok((c.params()?, c.servo()?))
}

fn propeller(geom: &Option<PathBuf>, polar: &str) -> Result<(BladeGeometry, AirfoilModel)> {
    let g: GeometryConfig = load_config(geom)?;
    let air = aero::load_airfoil(polar).with_context(|| format!("loading polar {polar}"))?;
    Ok((g.geometry()?, air))
}

fn csv_out(out: &Option<PathBuf>, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn run_mech(params: &Option<PathBuf>, out: &Option<PathBuf>, action: &MechAction) -> Result<()> {
    let (p, servo) = mechanism(params)?;
    match *action {
        MechAction::IoCurve { samples } => {
            let n = samples.max(2);
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let zeta = servo.pwm_min + (servo.pwm_max - servo.pwm_min) * i as f64 / (n - 1) as f64;
                let xi = servo.pwm_to_xi(zeta);
                rows.push(vec![zeta, xi.to_degrees(), forward_pitch(&p, xi)?.to_degrees()]);
            }
            csv_out(out, &["zeta_us", "xi_deg", "gamma_deg"], rows.into_iter())
        }
        MechAction::Singularities => {
            let mut w = output(out)?;
            let sp = singular_pitch(&p);
            for (name, r) in [("extended", sp.extended), ("folded", sp.folded)] {
                match r {
                    Ok(g) => writeln!(w, "gain singularity ({name}): gamma_s = {:.6} deg", g.to_degrees())?,
                    Err(e) => writeln!(w, "gain singularity ({name}): none ({e})")?,
                }
            }
            for (xi, g) in dwell_points(&p) {
                match g {
                    Ok(g) => writeln!(w, "dwell point: xi = {:.1} deg, gamma = {:.6} deg", xi.to_degrees(), g.to_degrees())?,
                    Err(e) => writeln!(w, "dwell point: xi = {:.1} deg, unreachable ({e})", xi.to_degrees())?,
                }
            }
            w.flush()?;
            Ok(())
        }
        MechAction::ServoTorque { moment, samples } => {
            let n = samples.max(2);
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let xi = servo.xi_min + (servo.xi_max - servo.xi_min) * i as f64 / (n - 1) as f64;
                let pz = pose(&p, xi)?;
                let tau = servo_torque(&p, &pz, moment).map_or(f64::NAN, |t| t);
                rows.push(vec![xi.to_degrees(), pz.gamma.to_degrees(), tau]);
            }
            csv_out(out, &["xi_deg", "gamma_deg", "servo_torque_Nm"], rows.into_iter())
        }
    }
}

fn run_prop(geom: &Option<PathBuf>, polar: &str, out: &Option<PathBuf>, action: &PropAction) -> Result<()> {
    let (g, air) = propeller(geom, polar)?;
    match action {
        PropAction::Sweep { pitch_min, pitch_max, pitch_step, rpm } => {
            if !(*pitch_step > 0.0 && pitch_min <= pitch_max) {
                bail!("need pitch_step > 0 and pitch_min <= pitch_max");
            }
            let n = ((pitch_max - pitch_min) / pitch_step + 1e-9).floor() as usize + 1;
            let mut rows = Vec::new();
            for i in 0..n {
                let gamma = (pitch_min + pitch_step * i as f64).to_radians();
                for &r in rpm {
                    let op = OperatingPoint::from_rpm(gamma, r);
                    let s = rotor_solve(&g, &air, &op).with_context(|| format!("solving {:.2} deg, {r} rpm", gamma.to_degrees()))?;
                    rows.push(DatasetRow { gamma, omega: op.omega, thrust: s.thrust, torque: s.torque, moment: s.moment, converged: true });
                }
            }
            aero::write_rotor_table(output(out)?, &rows)?;
        }
        PropAction::ZeroThrust { rpm } => {
            let z = zero_thrust_pitch(&g, &air, rpm * RPM_TO_RAD_S)?;
            writeln!(output(out)?, "zero-thrust pitch at {rpm} rpm: {:.6} deg", z.to_degrees())?;
        }
        PropAction::Dataset { rows, seed } => {
            let base = DatasetSweep::default();
            if *rows == 0 || rows % base.n_pitch != 0 {
                bail!("rows must be a positive multiple of {}", base.n_pitch);
            }
            let sweep = DatasetSweep { n_rpm: rows / base.n_pitch, seed: *seed, ..base };
            let data = generate_actuator_dataset(&g, &air, &sweep);
            let dropped = data.iter().filter(|r| !r.converged).count();
            if dropped > 0 {
                log::warn!("{dropped} operating points did not converge and were dropped");
            }
            aero::write_rotor_table(output(out)?, &data)?;
        }
    }
    Ok(())
}

fn run_train(dataset: &Path, net: Net, seed: u64, epochs: Option<usize>, out: &Path) -> Result<()> {
    let rows = aero::read_rotor_table(File::open(dataset).with_context(|| format!("opening {}", dataset.display()))?)
        .with_context(|| format!("reading {}", dataset.display()))?;
    let data = match net {
        Net::Nn1 => nn1_dataset(&rows),
        Net::Nn2 => nn2_dataset(&rows),
    };
    let defaults = TrainConfig::default();
    let cfg = TrainConfig { seed, epochs: epochs.unwrap_or(defaults.epochs), ..defaults };
    let (m, report) = train_mlp(&data, &cfg)?;
    model::write_model(BufWriter::new(File::create(out)?), &m)?;
    println!(
        "trained on {} rows ({} test): train mse {:.5}, test mse {:.5}",
        report.n_train, report.n_test, report.train_mse, report.test_mse
    );
    Ok(())
}

fn read_model_file(p: &Path) -> Result<heliquad_core::nn::MlpModel> {
    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    model::read_model(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))
}

#[allow(clippy::too_many_arguments)]
fn run_sim(
    vehicle: &Option<PathBuf>,
    mech: &Option<PathBuf>,
    geom: &Option<PathBuf>,
    polar: &str,
    gains: &Option<PathBuf>,
    nn1: &Option<PathBuf>,
    nn2: &Option<PathBuf>,
    mission_path: &Path,
    out: &Path,
    seed: u64,
) -> Result<ExitCode> {
    let veh = load_config::<VehicleConfig>(vehicle)?.params()?;
    let gains = load_config::<GainsConfig>(gains)?.gains()?;
    let (mp, servo) = mechanism(mech)?;
    let (g, air) = propeller(geom, polar)?;
    let text = std::fs::read_to_string(mission_path).with_context(|| format!("opening {}", mission_path.display()))?;
    let script = mission::parse_mission(&text).with_context(|| format!("reading {}", mission_path.display()))?;

    let lim = 30f64.to_radians();
    let rotor = RotorMap::build(&g, &air, RHO_DEFAULT, -lim, lim, 1201)?;
    let zt = rotor.zero_thrust_pitch().context("rotor has no zero-thrust pitch in +-30 deg")?;
    let (nn1, nn2) = match (nn1, nn2) {
        (Some(a), Some(b)) => (read_model_file(a)?, read_model_file(b)?),
        _ => {
            log::info!("network file missing; training both networks on a synthetic dataset (seed {seed})");
            let train = TrainConfig::default();
            let rows = generate_actuator_dataset(&g, &air, &DatasetSweep { seed, ..DatasetSweep::default() });
            let a = match nn1 {
                Some(p) => read_model_file(p)?,
                None => train_mlp(&nn1_dataset(&rows), &train)?.0,
            };
            let b = match nn2 {
                Some(p) => read_model_file(p)?,
                None => train_mlp(&nn2_dataset(&rows), &train)?.0,
            };
            (a, b)
        }
    };
    let models = SimModels { nn1, nn2, rotor };

    let mut cfg = SimConfig::new(zt);
    cfg.vehicle = veh;
    cfg.gains = gains;
    let l = cfg.strategy.limits;
    for gamma in [l.gamma_min, l.gamma_max] {
        inverse_pitch(&mp, gamma, servo.xi_min, servo.xi_max)
            .with_context(|| format!("mechanism cannot reach the {:.1} deg pitch limit", gamma.to_degrees()))?;
    }

    match run_mission(&cfg, &models, &script) {
        Ok(log) => {
            logcsv::export_csv(&log.records, out).with_context(|| format!("writing {}", out.display()))?;
            match log.landed_at {
                Some(t) => eprintln!("mission complete: {} records, landed at {t:.3} s", log.records.len()),
                None => eprintln!("mission complete: {} records", log.records.len()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(abort) => {
            logcsv::export_csv(&abort.log.records, out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("error: {} ({} records written)", abort.reason, abort.log.records.len());
            Ok(ExitCode::from(2))
        }
    }
}

fn run_metrics(log: &Path, windows: &str, transient: f64) -> Result<()> {
    let recs = logcsv::import_csv(log).with_context(|| format!("reading {}", log.display()))?;
    let mw = MetricWindows { windows: mission::parse_windows(windows)?, transient, ..MetricWindows::default() };
    let m = compute_metrics(&recs, &mw)?;
    println!("samples            {}", m.samples);
    println!("rmse_roll_deg      {:.4}", m.rmse_roll);
    println!("rmse_pitch_deg     {:.4}", m.rmse_pitch);
    println!("rmse_yaw_rate_dps  {:.4}", m.yaw_rate_rmse);
    println!("max_roll_deg       {:.4}", m.max_roll_error);
    println!("max_pitch_deg      {:.4}", m.max_pitch_error);
    println!("max_yaw_rate_dps   {:.4}", m.max_yaw_rate_error);
    for (t, s) in &m.settling {
        match s {
            Some(s) => println!("settling after {t:.3} s: {s:.3} s"),
            None => println!("settling after {t:.3} s: not settled"),
        }
    }
    println!("omega_bounded      {}", m.omega_bounded);
    println!("gamma_bounded      {}", m.gamma_bounded);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Mech { params, out, action } => run_mech(params, out, action)?,
        Cmd::Prop { geom, polar, out, action } => run_prop(geom, polar, out, action)?,
        Cmd::Train { dataset, net, seed, epochs, out } => run_train(dataset, *net, *seed, *epochs, out)?,
        Cmd::Sim { vehicle, mech, geom, polar, gains, nn1, nn2, mission, out, seed } => {
            return run_sim(vehicle, mech, geom, polar, gains, nn1, nn2, mission, out, *seed);
        }
        Cmd::Metrics { log, windows, transient } => run_metrics(log, windows, *transient)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
