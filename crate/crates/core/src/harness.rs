//! Scripted closed-loop missions, fault injection, logging and metrics.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

use crate::allocation::{
    fault_hover_feasibility, opposite, ActuatorCommand, AllocationError, AllocationStrategy, ControlAllocator,
    MixerGeometry,
};
use crate::controller::{quat_to_euler, AttitudeController, ControllerGains, FlipAxis, PilotCommand};
use crate::dynamics::{motor_lag, rotor_wrench, step, DynamicsError, RigidBodyState, VehicleParams};
use crate::mechanism::pitch_to_pwm;
use crate::nn::{nn1_dataset, nn2_dataset, train_mlp, MlpModel, NnError, TrainConfig, TrainReport};
use crate::propeller::{
    generate_actuator_dataset, AirfoilModel, BladeGeometry, DatasetRow, DatasetSweep, PropellerError, RotorMap,
};
use crate::wrap_pi;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid mission script: {0}")]
    InvalidScript(&'static str),
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("allocation failed at t = {t}: {source}")]
    Allocation { t: f64, source: AllocationError },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("rotor map has no zero-thrust pitch")]
    NoZeroThrustPitch,
    #[error("no log records in window [{start}, {end}]")]
    EmptyWindow { start: f64, end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MissionEvent {
    /// Pilot attitude and yaw-rate command; `collective: None` hands
    /// collective to the altitude hold.
    Setpoint { t: f64, roll: f64, pitch: f64, yaw_rate: f64, collective: Option<f64> },
    Sigma { t: f64, inverted: bool },
    /// Switches motor `mu` off (0 restores nothing; failures are permanent).
    Mu { t: f64, mu: u8 },
    /// Altitude-hold target, approached at `rate` [m/s] when given.
    Altitude { t: f64, z: f64, rate: Option<f64> },
}

impl MissionEvent {
    pub fn time(&self) -> f64 {
        match *self {
            Self::Setpoint { t, .. } | Self::Sigma { t, .. } | Self::Mu { t, .. } | Self::Altitude { t, .. } => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionScript {
    pub events: Vec<MissionEvent>,
    pub duration: f64,
    /// Controller period, also the plant step [s].
    pub dt: f64,
}

impl MissionScript {
    /// Start altitude set by an immediate altitude event at `t = 0`.
    pub fn initial_altitude(&self) -> Option<f64> {
        self.events.iter().take_while(|e| e.time() <= 0.0).find_map(|e| match *e {
            MissionEvent::Altitude { z, rate: None, .. } => Some(z),
            _ => None,
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(HarnessError::InvalidScript("dt must be positive"));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(HarnessError::InvalidScript("duration must cover at least one step"));
        }
        let mut last = 0.0;
        for e in &self.events {
            let t = e.time();
            if !(t >= last && t <= self.duration) {
                return Err(HarnessError::InvalidScript("event times must be non-decreasing and within duration"));
            }
            last = t;
            match *e {
                MissionEvent::Mu { mu, .. } if mu > 4 => {
                    return Err(HarnessError::InvalidScript("mu must be in 0..=4"));
                }
                MissionEvent::Setpoint { roll, pitch, .. } if roll.abs() > PI / 4.0 || pitch.abs() > PI / 4.0 => {
                    return Err(HarnessError::InvalidScript("tilt commands are limited to 45 deg"));
                }
                MissionEvent::Altitude { rate: Some(r), .. } if !(r > 0.0) => {
                    return Err(HarnessError::InvalidScript("altitude rate must be positive"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Altitude hold standing in for the pilot's collective stick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltitudeHold {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the integral term [m/s^2].
    pub integral_limit: f64,
    /// Lower bound on `|R33|` when dividing out tilt.
    pub min_tilt_cos: f64,
    /// Cap on the commanded collective as a multiple of weight.
    pub max_weight_ratio: f64,
}

impl Default for AltitudeHold {
    fn default() -> Self {
        Self { kp: 2.0, ki: 0.5, kd: 2.5, integral_limit: 3.0, min_tilt_cos: 0.7, max_weight_ratio: 1.8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub vehicle: VehicleParams,
    pub gains: ControllerGains,
    pub strategy: AllocationStrategy,
    pub flip_axis: FlipAxis,
    pub altitude_hold: AltitudeHold,
    pub initial_altitude: f64,
    /// Delay between motor failure and the controller switching `mu` [s].
    pub fdi_delay: f64,
}

impl SimConfig {
    pub fn new(zero_thrust_pitch: f64) -> Self {
        Self {
            vehicle: VehicleParams::prototype(),
            gains: ControllerGains::simulation(),
            strategy: AllocationStrategy::new(zero_thrust_pitch),
            flip_axis: FlipAxis::Roll,
            altitude_hold: AltitudeHold::default(),
            initial_altitude: 3.0,
            fdi_delay: 0.0,
        }
    }

    pub fn for_models(models: &SimModels) -> Result<Self, HarnessError> {
        Ok(Self::new(models.rotor.zero_thrust_pitch().ok_or(HarnessError::NoZeroThrustPitch)?))
    }
}

/// Identified surrogates plus the rotor model standing in for the real rotors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimModels {
    pub nn1: MlpModel,
    pub nn2: MlpModel,
    pub rotor: RotorMap,
}

/// Builds the rotor map, generates the synthetic dataset and trains both networks.
pub fn build_default_models(sweep: &DatasetSweep, train: &TrainConfig) -> Result<(SimModels, [TrainReport; 2]), ModelBuildError> {
    let geom = BladeGeometry::prototype();
    let airfoil = AirfoilModel::default();
    let rotor = RotorMap::prototype()?;
    let rows: Vec<DatasetRow> =
        generate_actuator_dataset(&geom, &airfoil, sweep).into_iter().filter(|r| r.converged).collect();
    let (nn1, r1) = train_mlp(&nn1_dataset(&rows), train)?;
    let (nn2, r2) = train_mlp(&nn2_dataset(&rows), train)?;
    Ok((SimModels { nn1, nn2, rotor }, [r1, r2]))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelBuildError {
    #[error(transparent)]
    Propeller(#[from] PropellerError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogRecord {
    pub t: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Roll, pitch, yaw [rad].
    pub euler: [f64; 3],
    pub rate: [f64; 3],
    pub roll_d: f64,
    pub pitch_d: f64,
    pub yaw_rate_d: f64,
    pub rate_d: [f64; 3],
    pub moment: [f64; 3],
    pub thrust: f64,
    pub omega_cmd: [f64; 4],
    pub omega_act: [f64; 4],
    pub gamma_cmd: [f64; 4],
    pub zeta_servo: [f64; 4],
    pub zeta_motor: [f64; 4],
    pub sigma: bool,
    pub mu: u8,
}

/// Fixed column order of a flattened [`LogRecord`].
pub const LOG_COLUMNS: [&str; LogRecord::WIDTH] = [
    "t", "x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw", "p", "q", "r", "roll_d", "pitch_d", "yaw_rate_d",
    "p_d", "q_d", "r_d", "mbx", "mby", "mbz", "t_sigma", "omega_cmd1", "omega_cmd2", "omega_cmd3", "omega_cmd4",
    "omega_act1", "omega_act2", "omega_act3", "omega_act4", "gamma_cmd1", "gamma_cmd2", "gamma_cmd3", "gamma_cmd4",
    "zeta_servo1", "zeta_servo2", "zeta_servo3", "zeta_servo4", "zeta_motor1", "zeta_motor2", "zeta_motor3",
    "zeta_motor4", "sigma", "mu",
];

impl LogRecord {
    /// Number of flattened columns.
    pub const WIDTH: usize = 45;

    pub fn to_row(&self) -> [f64; Self::WIDTH] {
        let mut row = [0.0; Self::WIDTH];
        let mut k = 0;
        let mut put = |vals: &[f64]| {
            row[k..k + vals.len()].copy_from_slice(vals);
            k += vals.len();
        };
        put(&[self.t]);
        put(&self.position);
        put(&self.velocity);
        put(&self.euler);
        put(&self.rate);
        put(&[self.roll_d, self.pitch_d, self.yaw_rate_d]);
        put(&self.rate_d);
        put(&self.moment);
        put(&[self.thrust]);
        put(&self.omega_cmd);
        put(&self.omega_act);
        put(&self.gamma_cmd);
        put(&self.zeta_servo);
        put(&self.zeta_motor);
        put(&[if self.sigma { 1.0 } else { 0.0 }, self.mu as f64]);
        row
    }

    /// Inverse of [`LogRecord::to_row`]; `None` on a wrong width or bad flags.
    pub fn from_row(row: &[f64]) -> Option<Self> {
        if row.len() != Self::WIDTH {
            return None;
        }
        let mut k = 0;
        let mut take = |n: usize| {
            let s = &row[k..k + n];
            k += n;
            s
        };
        let a3 = |s: &[f64]| [s[0], s[1], s[2]];
        let a4 = |s: &[f64]| [s[0], s[1], s[2], s[3]];
        let t = take(1)[0];
        let position = a3(take(3));
        let velocity = a3(take(3));
        let euler = a3(take(3));
        let rate = a3(take(3));
        let sp = a3(take(3));
        let rate_d = a3(take(3));
        let moment = a3(take(3));
        let thrust = take(1)[0];
        let omega_cmd = a4(take(4));
        let omega_act = a4(take(4));
        let gamma_cmd = a4(take(4));
        let zeta_servo = a4(take(4));
        let zeta_motor = a4(take(4));
        let flags = take(2);
        let sigma = match flags[0] {
            0.0 => false,
            1.0 => true,
            _ => return None,
        };
        let mu = flags[1];
        if !(mu == mu.floor() && (0.0..=4.0).contains(&mu)) {
            return None;
        }
        Some(Self {
            t,
            position,
            velocity,
            euler,
            rate,
            roll_d: sp[0],
            pitch_d: sp[1],
            yaw_rate_d: sp[2],
            rate_d,
            moment,
            thrust,
            omega_cmd,
            omega_act,
            gamma_cmd,
            zeta_servo,
            zeta_motor,
            sigma,
            mu: mu as u8,
        })
    }

    /// Euler yaw rate from body rates [rad/s].
    pub fn yaw_rate(&self) -> f64 {
        let (phi, theta) = (self.euler[0], self.euler[1]);
        let [_, q, r] = self.rate;
        (q * phi.sin() + r * phi.cos()) / theta.cos()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MissionLog {
    pub records: Vec<LogRecord>,
    /// Time the ground clamp ended the mission, if it did.
    pub landed_at: Option<f64>,
}

/// A mission stopped early, with everything logged up to the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("mission aborted: {reason}")]
pub struct MissionAbort {
    pub reason: HarnessError,
    pub log: Box<MissionLog>,
}

/// Steady actuator command holding a level hover with failed motor `mu`.
pub fn trim_command(config: &SimConfig, rotor: &RotorMap, mu: u8) -> ActuatorCommand {
    let s = &config.strategy;
    let w = config.vehicle.weight();
    if mu == 0 {
        let om = rotor.omega_for_thrust(s.nominal_pitch, 0.25 * w).unwrap_or(s.limits.omega_min);
        return ActuatorCommand::uniform(om, s.nominal_pitch);
    }
    let m = mu as usize - 1;
    let o = opposite(mu as usize) - 1;
    let feas = fault_hover_feasibility(rotor, w, s, false);
    let c_q = rotor.torque(s.zero_thrust_pitch, 1.0);
    let mut cmd = ActuatorCommand::uniform(feas.pair_speed, s.fault_pitch);
    cmd.omega[o] = (feas.demanded_torque / c_q).sqrt();
    cmd.gamma[o] = s.zero_thrust_pitch;
    cmd.omega[m] = 0.0;
    cmd.enabled[m] = false;
    cmd
}

struct Pilot {
    roll: f64,
    pitch: f64,
    yaw_rate: f64,
    collective: Option<f64>,
    sigma: bool,
    z_target: f64,
    z_goal: f64,
    z_rate: Option<f64>,
    failed: u8,
    failed_at: f64,
}

impl Pilot {
    fn apply(&mut self, e: &MissionEvent) {
        match *e {
            MissionEvent::Setpoint { roll, pitch, yaw_rate, collective, .. } => {
                self.roll = roll;
                self.pitch = pitch;
                self.yaw_rate = yaw_rate;
                self.collective = collective;
            }
            MissionEvent::Sigma { inverted, .. } => self.sigma = inverted,
            MissionEvent::Mu { t, mu } => {
                if self.failed == 0 && mu != 0 {
                    self.failed = mu;
                    self.failed_at = t;
                }
            }
            MissionEvent::Altitude { z, rate, .. } => {
                self.z_goal = z;
                self.z_rate = rate;
                if rate.is_none() {
                    self.z_target = z;
                }
            }
        }
    }

    fn advance_target(&mut self, dt: f64) {
        if let Some(r) = self.z_rate {
            let step = r * dt;
            self.z_target += (self.z_goal - self.z_target).clamp(-step, step);
        }
    }
}

fn abort(reason: HarnessError, records: Vec<LogRecord>) -> MissionAbort {
    MissionAbort { reason, log: Box::new(MissionLog { records, landed_at: None }) }
}

/// Runs a script to completion or until the vehicle lands onto a ground target.
pub fn run_mission(config: &SimConfig, models: &SimModels, script: &MissionScript) -> Result<MissionLog, MissionAbort> {
    let fail = |r: HarnessError| abort(r, Vec::new());
    script.validate().map_err(fail)?;
    config.vehicle.validate().map_err(|e| fail(e.into()))?;

    let veh = &config.vehicle;
    let dt = script.dt;
    let z0 = script.initial_altitude().unwrap_or(config.initial_altitude);
    let mut pilot = Pilot {
        roll: 0.0,
        pitch: 0.0,
        yaw_rate: 0.0,
        collective: None,
        sigma: false,
        z_target: z0,
        z_goal: z0,
        z_rate: None,
        failed: 0,
        failed_at: 0.0,
    };
    let mut next_event = 0;
    while next_event < script.events.len() && script.events[next_event].time() <= 0.0 {
        pilot.apply(&script.events[next_event]);
        next_event += 1;
    }
    let initial_mu = if config.fdi_delay <= 0.0 { pilot.failed } else { 0 };
    let trim = trim_command(config, &models.rotor, initial_mu);
    let geometry = MixerGeometry { arm: veh.arm, spin: veh.spin };
    let mut allocator = ControlAllocator::new(
        config.strategy,
        geometry,
        models.nn1.clone(),
        models.nn2.clone(),
        models.rotor.clone(),
        trim,
    )
    .map_err(|e| fail(HarnessError::Allocation { t: 0.0, source: e }))?;
    let mut controller = AttitudeController::new(config.gains);
    controller.flip_axis = config.flip_axis;

    let mut state = RigidBodyState::at_rest(z0);
    let mut omega_act = trim.omega;
    let n_steps = (script.duration / dt).round() as usize;
    let mut records = Vec::with_capacity(n_steps + 1);
    let mut landed_at = None;
    let mut z_integral = 0.0;

    for k in 0..=n_steps {
        let t = k as f64 * dt;
        while next_event < script.events.len() && script.events[next_event].time() <= t + 0.5 * dt {
            pilot.apply(&script.events[next_event]);
            next_event += 1;
        }
        pilot.advance_target(dt);
        let mu = if pilot.failed != 0 && t + 0.5 * dt >= pilot.failed_at + config.fdi_delay { pilot.failed } else { 0 };

        let r33 = state.attitude.to_rotation_matrix()[(2, 2)];
        let h = &config.altitude_hold;
        let z_err = pilot.z_target - state.position.z;
        z_integral = (z_integral + h.ki * z_err * dt).clamp(-h.integral_limit, h.integral_limit);
        let collective = pilot.collective.unwrap_or_else(|| {
            let a = h.kp * z_err + z_integral - h.kd * state.velocity.z;
            let t_cmd = veh.mass * (veh.gravity + a) / r33.abs().max(h.min_tilt_cos);
            t_cmd.clamp(0.0, h.max_weight_ratio * veh.weight())
        });
        let cmd = PilotCommand {
            roll: pilot.roll,
            pitch: pilot.pitch,
            yaw_rate: pilot.yaw_rate,
            collective,
            sigma: pilot.sigma,
            mu,
        };
        let ctl = controller.update(&cmd, &state, dt);
        let out = match allocator.command(&ctl.moment, ctl.setpoints.collective, mu, dt) {
            Ok(o) => o,
            Err(e) => return Err(abort(HarnessError::Allocation { t, source: e }, records)),
        };
        let mut act = out.command;
        if pilot.failed != 0 {
            act.omega[pilot.failed as usize - 1] = 0.0;
        }

        // Rotor forces use the speed reached at the start of the step.
        let mut thrusts = [0.0; 4];
        let mut torques = [0.0; 4];
        for i in 0..4 {
            thrusts[i] = models.rotor.thrust(act.gamma[i], omega_act[i]);
            torques[i] = models.rotor.torque(act.gamma[i], omega_act[i]);
        }
        let wrench = rotor_wrench(veh, thrusts, torques);

        let (roll, pitch, yaw) = quat_to_euler(&state.attitude);
        let v3 = |v: &Vector3<f64>| [v.x, v.y, v.z];
        records.push(LogRecord {
            t,
            position: v3(&state.position),
            velocity: v3(&state.velocity),
            euler: [roll, pitch, yaw],
            rate: v3(&state.rate),
            roll_d: ctl.setpoints.roll,
            pitch_d: ctl.setpoints.pitch,
            yaw_rate_d: ctl.setpoints.yaw_rate,
            rate_d: v3(&ctl.omega_d),
            moment: v3(&ctl.moment),
            thrust: ctl.setpoints.collective,
            omega_cmd: act.omega,
            omega_act,
            gamma_cmd: act.gamma,
            zeta_servo: core::array::from_fn(|i| pitch_to_pwm(act.gamma[i].to_degrees(), veh.zeta0[i])),
            zeta_motor: act.motor_pwm(config.strategy.limits.omega_max),
            sigma: pilot.sigma,
            mu,
        });
        if k == n_steps {
            break;
        }

        state = step(veh, &state, &wrench, dt);
        for i in 0..4 {
            omega_act[i] = motor_lag(omega_act[i], act.omega[i], dt, veh.motor_tau);
        }
        if !state.is_finite() {
            return Err(abort(HarnessError::NonFiniteState { t: t + dt }, records));
        }
        if state.position.z < 0.0 {
            state.position.z = 0.0;
            state.velocity.z = state.velocity.z.max(0.0);
            if pilot.z_target <= 0.0 {
                landed_at = Some(t + dt);
                break;
            }
        }
    }
    Ok(MissionLog { records, landed_at })
}

/// Metric evaluation windows and event handling.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricWindows {
    /// `[start, end]` intervals [s]; empty means the whole log.
    pub windows: Vec<(f64, f64)>,
    /// Excluded time after each sigma or mu change [s].
    pub transient: f64,
    /// Band for settling detection on roll and pitch [rad].
    pub settle_band: f64,
    pub omega_max: f64,
    pub gamma_range: (f64, f64),
}

impl Default for MetricWindows {
    fn default() -> Self {
        let l = crate::allocation::ActuatorLimits::default();
        Self {
            windows: Vec::new(),
            transient: 3.0,
            settle_band: 2f64.to_radians(),
            omega_max: l.omega_max,
            gamma_range: (l.gamma_min, l.gamma_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingMetrics {
    pub rmse_roll: f64,
    pub rmse_pitch: f64,
    pub yaw_rate_rmse: f64,
    pub max_roll_error: f64,
    pub max_pitch_error: f64,
    pub max_yaw_rate_error: f64,
    /// Per sigma/mu event: `(event time, settling time after it)`, judged up
    /// to the next event.
    pub settling: Vec<(f64, Option<f64>)>,
    pub omega_bounded: bool,
    pub gamma_bounded: bool,
    pub samples: usize,
}

/// Roll error modulo a full turn, so inverted roll near +-180 deg is continuous.
pub fn roll_error(rec: &LogRecord) -> f64 {
    wrap_pi(rec.euler[0] - rec.roll_d)
}

/// Inverted-flight roll mapped to `[0, 360)` deg.
pub fn roll_deg_0_360(roll: f64) -> f64 {
    let d = roll.to_degrees();
    if d < 0.0 {
        d + 360.0
    } else {
        d
    }
}

fn event_times(log: &[LogRecord]) -> Vec<f64> {
    log.windows(2).filter(|w| w[0].sigma != w[1].sigma || w[0].mu != w[1].mu).map(|w| w[1].t).collect()
}

pub fn compute_metrics(log: &[LogRecord], cfg: &MetricWindows) -> Result<TrackingMetrics, HarnessError> {
    let (t0, t1) = match (log.first(), log.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(HarnessError::EmptyWindow { start: 0.0, end: 0.0 }),
    };
    let windows = if cfg.windows.is_empty() { alloc::vec![(t0, t1)] } else { cfg.windows.clone() };
    let events = event_times(log);
    let excluded = |t: f64| events.iter().any(|e| t >= *e && t < e + cfg.transient);

    let (mut sr, mut sp, mut sy) = (0.0, 0.0, 0.0);
    let (mut mr, mut mp, mut my) = (0.0, 0.0, 0.0);
    let mut n = 0usize;
    for &(a, b) in &windows {
        let before = n;
        for rec in log.iter().filter(|r| r.t >= a && r.t <= b && !excluded(r.t)) {
            let er = roll_error(rec);
            let ep = rec.euler[1] - rec.pitch_d;
            let ey = rec.yaw_rate() - rec.yaw_rate_d;
            sr += er * er;
            sp += ep * ep;
            sy += ey * ey;
            mr = er.abs().max(mr);
            mp = ep.abs().max(mp);
            my = ey.abs().max(my);
            n += 1;
        }
        if n == before {
            return Err(HarnessError::EmptyWindow { start: a, end: b });
        }
    }
    let rms = |s: f64| (s / n as f64).sqrt();

    let settling = events
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let next = events.get(k + 1).copied().unwrap_or(f64::INFINITY);
            let after: Vec<&LogRecord> = log.iter().filter(|r| r.t >= e && r.t < next).collect();
            let outside = |r: &&LogRecord| {
                roll_error(r).abs() > cfg.settle_band || (r.euler[1] - r.pitch_d).abs() > cfg.settle_band
            };
            let settled = match after.iter().rposition(outside) {
                None => Some(0.0),
                Some(i) if i + 1 < after.len() => Some(after[i + 1].t - e),
                Some(_) => None,
            };
            (e, settled)
        })
        .collect();

    let omega_bounded = log.iter().all(|r| r.omega_cmd.iter().all(|w| (0.0..=cfg.omega_max).contains(w)));
    let (gmin, gmax) = cfg.gamma_range;
    let gamma_bounded = log.iter().all(|r| r.gamma_cmd.iter().all(|g| (gmin..=gmax).contains(g)));

    Ok(TrackingMetrics {
        rmse_roll: rms(sr).to_degrees(),
        rmse_pitch: rms(sp).to_degrees(),
        yaw_rate_rmse: rms(sy).to_degrees(),
        max_roll_error: mr.to_degrees(),
        max_pitch_error: mp.to_degrees(),
        max_yaw_rate_error: my.to_degrees(),
        settling,
        omega_bounded,
        gamma_bounded,
        samples: n,
    })
}

/// Hover at the initial altitude with the attitude held level.
pub fn hover_mission(duration: f64) -> MissionScript {
    MissionScript { events: Vec::new(), duration, dt: 1e-3 }
}

/// Upright at 10 m, inverted at 5 s, upright again at 15 s.
pub fn flip_mission() -> MissionScript {
    MissionScript {
        events: alloc::vec![
            MissionEvent::Altitude { t: 0.0, z: 10.0, rate: None },
            MissionEvent::Sigma { t: 5.0, inverted: true },
            MissionEvent::Sigma { t: 15.0, inverted: false },
        ],
        duration: 22.0,
        dt: 1e-3,
    }
}

/// Motor 4 off throughout; +-20 deg/s yaw-rate square wave from 5 s to 25 s.
pub fn three_actuator_mission() -> MissionScript {
    let rate = 20f64.to_radians();
    let mut events = alloc::vec![MissionEvent::Mu { t: 0.0, mu: 4 }];
    for i in 0..5 {
        let t = 5.0 + 4.0 * i as f64;
        let s = if i % 2 == 0 { rate } else { -rate };
        events.push(MissionEvent::Setpoint { t, roll: 0.0, pitch: 0.0, yaw_rate: s, collective: None });
    }
    events.push(MissionEvent::Setpoint { t: 25.0, roll: 0.0, pitch: 0.0, yaw_rate: 0.0, collective: None });
    MissionScript { events, duration: 30.0, dt: 1e-3 }
}

/// Healthy hover, motor 4 off at 25 s, then a descent onto the ground.
pub fn failure_mission() -> MissionScript {
    MissionScript {
        events: alloc::vec![
            MissionEvent::Mu { t: 25.0, mu: 4 },
            MissionEvent::Altitude { t: 30.0, z: -0.5, rate: Some(0.4) },
        ],
        duration: 45.0,
        dt: 1e-3,
    }
}
