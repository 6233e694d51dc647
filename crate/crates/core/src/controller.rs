//! Flip-capable attitude stack: setpoint shaping, quaternion P law on
//! attitude, PID on body rates.

use core::f64::consts::PI;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

use crate::dynamics::RigidBodyState;

/// Default anti-windup bound on each integral term [N m].
pub const DEFAULT_WINDUP: f64 = 0.5;
/// Pilot roll/pitch command limit [rad].
pub const MAX_TILT_CMD: f64 = PI / 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ControllerError {
    #[error("commanded tilt {0} rad exceeds the limit")]
    TiltLimit(f64),
    #[error("failed-actuator index {0} is not in 0..=4")]
    BadActuator(u8),
    #[error("gains must be non-negative")]
    NegativeGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PilotCommand {
    pub roll: f64,
    pub pitch: f64,
    pub yaw_rate: f64,
    /// Collective magnitude [N]; the flip flag sets its sign.
    pub collective: f64,
    /// Inverted-flight flag.
    pub sigma: bool,
    /// Failed actuator, 0 when healthy.
    pub mu: u8,
}

impl PilotCommand {
    pub fn validate(&self) -> Result<(), ControllerError> {
        for a in [self.roll, self.pitch] {
            if !(a.abs() <= MAX_TILT_CMD) {
                return Err(ControllerError::TiltLimit(a));
            }
        }
        if self.mu > 4 {
            return Err(ControllerError::BadActuator(self.mu));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoints {
    pub roll: f64,
    pub pitch: f64,
    pub yaw_rate: f64,
    pub collective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlipAxis {
    #[default]
    Roll,
    Pitch,
}

/// Adds a half turn about the flip axis and negates collective when inverted.
pub fn desired_setpoints(cmd: &PilotCommand) -> Setpoints {
    desired_setpoints_about(cmd, FlipAxis::Roll)
}

pub fn desired_setpoints_about(cmd: &PilotCommand, axis: FlipAxis) -> Setpoints {
    let base = Setpoints { roll: cmd.roll, pitch: cmd.pitch, yaw_rate: cmd.yaw_rate, collective: cmd.collective };
    if !cmd.sigma {
        return base;
    }
    match axis {
        FlipAxis::Roll => Setpoints { roll: base.roll + PI, collective: -base.collective, ..base },
        FlipAxis::Pitch => Setpoints { pitch: base.pitch + PI, collective: -base.collective, ..base },
    }
}

/// ZYX Euler angles to the body-to-inertial quaternion.
pub fn euler_to_quat(roll: f64, pitch: f64, yaw: f64) -> UnitQuaternion<f64> {
    let (sr, cr) = (0.5 * roll).sin_cos();
    let (sp, cp) = (0.5 * pitch).sin_cos();
    let (sy, cy) = (0.5 * yaw).sin_cos();
    UnitQuaternion::new_unchecked(Quaternion::new(
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ))
}

/// ZYX Euler angles `(roll, pitch, yaw)`, pitch in `[-pi/2, pi/2]`.
pub fn quat_to_euler(q: &UnitQuaternion<f64>) -> (f64, f64, f64) {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
    let pitch = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0).asin();
    let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
    (roll, pitch, yaw)
}

/// Desired body rate from the attitude error `q^-1 q_d`.
pub fn attitude_control(q: &UnitQuaternion<f64>, q_d: &UnitQuaternion<f64>, k_a: &Vector3<f64>) -> Vector3<f64> {
    let e = q.quaternion().conjugate() * q_d.quaternion();
    let s = if e.w < 0.0 { -1.0 } else { 1.0 };
    k_a.component_mul(&e.vector().into_owned()) * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    pub ka: Vector3<f64>,
    pub kp: Vector3<f64>,
    pub ki: Vector3<f64>,
    pub kd: Vector3<f64>,
}

impl ControllerGains {
    /// The flight-test gain set.
    pub fn table4() -> Self {
        Self {
            ka: Vector3::new(8.0, 8.0, 0.0),
            kp: Vector3::new(0.25, 0.23, 0.0),
            ki: Vector3::new(0.35, 0.35, 0.2),
            kd: Vector3::new(3e-4, 3e-4, 0.0),
        }
    }

    /// Flight-test gains with proportional yaw-rate damping added.
    ///
    /// An integral-only yaw loop on an undamped axis oscillates once motor
    /// lag is present.
    pub fn simulation() -> Self {
        let mut g = Self::table4();
        g.kp.z = YAW_KP;
        g
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        let all = self.ka.iter().chain(self.kp.iter()).chain(self.ki.iter()).chain(self.kd.iter());
        if all.clone().any(|g| !(*g >= 0.0)) {
            return Err(ControllerError::NegativeGain);
        }
        Ok(())
    }
}

/// Yaw-rate proportional gain of [`ControllerGains::simulation`].
pub const YAW_KP: f64 = 0.074;

impl Default for ControllerGains {
    fn default() -> Self {
        Self::simulation()
    }
}

/// Integrator and derivative memory of the rate loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLoopState {
    /// Integral term `K_I * int(e)` per axis [N m].
    pub integral: Vector3<f64>,
    pub prev_error: Option<Vector3<f64>>,
    pub windup: f64,
}

impl RateLoopState {
    pub fn new(windup: f64) -> Self {
        Self { integral: Vector3::zeros(), prev_error: None, windup }
    }

    pub fn reset(&mut self) {
        self.integral = Vector3::zeros();
        self.prev_error = None;
    }
}

impl Default for RateLoopState {
    fn default() -> Self {
        Self::new(DEFAULT_WINDUP)
    }
}

/// Body moment from the rate error.
pub fn rate_pid(
    omega_d: &Vector3<f64>,
    omega: &Vector3<f64>,
    gains: &ControllerGains,
    dt: f64,
    state: &mut RateLoopState,
) -> Vector3<f64> {
    let e = omega_d - omega;
    let prev = state.prev_error.unwrap_or(e);
    let step = gains.ki.component_mul(&(e + prev)) * (0.5 * dt);
    let w = state.windup;
    state.integral = (state.integral + step).map(|v| v.clamp(-w, w));
    let derivative = if state.prev_error.is_some() { (e - prev) / dt } else { Vector3::zeros() };
    state.prev_error = Some(e);
    gains.kp.component_mul(&e) + state.integral + gains.kd.component_mul(&derivative)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub setpoints: Setpoints,
    pub q_d: UnitQuaternion<f64>,
    pub omega_d: Vector3<f64>,
    pub moment: Vector3<f64>,
}

/// Stateful wrapper running the full attitude stack once per control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeController {
    pub gains: ControllerGains,
    pub rate_state: RateLoopState,
    pub flip_axis: FlipAxis,
}

impl AttitudeController {
    pub fn new(gains: ControllerGains) -> Self {
        Self { gains, rate_state: RateLoopState::default(), flip_axis: FlipAxis::Roll }
    }

    pub fn update(&mut self, cmd: &PilotCommand, state: &RigidBodyState, dt: f64) -> ControlOutput {
        let setpoints = desired_setpoints_about(cmd, self.flip_axis);
        let (_, _, yaw) = quat_to_euler(&state.attitude);
        let q_d = euler_to_quat(setpoints.roll, setpoints.pitch, yaw);
        let omega_d = attitude_control(&state.attitude, &q_d, &self.gains.ka) + Vector3::new(0.0, 0.0, setpoints.yaw_rate);
        let moment = rate_pid(&omega_d, &state.rate, &self.gains, dt, &mut self.rate_state);
        ControlOutput { setpoints, q_d, omega_d, moment }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Rotation3, Unit};

    #[test]
    fn setpoint_logic() {
        let cmd = PilotCommand { roll: 0.1, pitch: -0.05, yaw_rate: 0.2, collective: 6.0, ..Default::default() };
        assert_eq!(
            desired_setpoints(&cmd),
            Setpoints { roll: 0.1, pitch: -0.05, yaw_rate: 0.2, collective: 6.0 }
        );
        let flip = PilotCommand { collective: 6.0, sigma: true, ..Default::default() };
        assert_eq!(desired_setpoints(&flip), Setpoints { roll: PI, pitch: 0.0, yaw_rate: 0.0, collective: -6.0 });
        let back = PilotCommand { sigma: false, ..cmd };
        assert_eq!(desired_setpoints(&back), desired_setpoints(&cmd));
    }

    #[test]
    fn euler_identity_and_flip() {
        let q = euler_to_quat(0.0, 0.0, 0.0);
        assert_eq!(q.quaternion().coords, Quaternion::new(1.0, 0.0, 0.0, 0.0).coords);
        let psi = 0.7;
        let q = euler_to_quat(PI, 0.0, psi);
        let oracle = Rotation3::from_axis_angle(&Vector3::z_axis(), psi) * Rotation3::from_axis_angle(&Vector3::x_axis(), PI);
        assert!((q.to_rotation_matrix().matrix() - oracle.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn small_roll_error_gain() {
        let d = 0.01;
        let q_d = UnitQuaternion::from_axis_angle(&Unit::new_normalize(Vector3::x()), d);
        let w = attitude_control(&UnitQuaternion::identity(), &q_d, &ControllerGains::table4().ka);
        assert!((w.x - 8.0 * (d / 2.0).sin()).abs() < 1e-15);
        assert!((w.x - 8.0 * d / 2.0).abs() < 1e-6);
    }

    #[test]
    fn attitude_law_double_cover() {
        let ka = ControllerGains::table4().ka;
        let q = euler_to_quat(0.3, -0.2, 1.0);
        let neg = UnitQuaternion::new_unchecked(-q.into_inner());
        assert_eq!(attitude_control(&q, &q, &ka), Vector3::zeros());
        assert!(attitude_control(&q, &neg, &ka).norm() < 1e-15);
        let qd = euler_to_quat(-0.4, 0.1, 0.2);
        let qd_neg = UnitQuaternion::new_unchecked(-qd.into_inner());
        assert!((attitude_control(&q, &qd, &ka) - attitude_control(&q, &qd_neg, &ka)).norm() < 1e-15);
    }

    #[test]
    fn sign_of_zero_scalar_is_positive() {
        let q_d = UnitQuaternion::new_unchecked(Quaternion::new(0.0, 1.0, 0.0, 0.0));
        let w = attitude_control(&UnitQuaternion::identity(), &q_d, &Vector3::new(8.0, 8.0, 0.0));
        assert_eq!(w.x, 8.0);
    }

    #[test]
    fn pid_at_rest_is_zero() {
        let mut s = RateLoopState::default();
        let w = Vector3::new(0.1, -0.2, 0.3);
        assert_eq!(rate_pid(&w, &w, &ControllerGains::table4(), 1e-3, &mut s), Vector3::zeros());
    }

    #[test]
    fn constant_error_accumulates() {
        let g = ControllerGains::table4();
        let mut s = RateLoopState::new(10.0);
        let e = Vector3::new(0.2, 0.1, 0.3);
        let n = 250;
        let dt = 1e-3;
        let mut m = Vector3::zeros();
        for _ in 0..n {
            m = rate_pid(&e, &Vector3::zeros(), &g, dt, &mut s);
        }
        let expect = g.ki.component_mul(&e) * (n as f64 * dt);
        assert!((s.integral - expect).norm() < 1e-14);
        assert!((m - (g.kp.component_mul(&e) + expect)).norm() < 1e-14);
    }

    #[test]
    fn windup_clamped() {
        let g = ControllerGains::table4();
        let mut s = RateLoopState::default();
        for _ in 0..100_000 {
            rate_pid(&Vector3::new(5.0, -5.0, 5.0), &Vector3::zeros(), &g, 1e-3, &mut s);
        }
        assert!(s.integral.iter().all(|v| v.abs() <= DEFAULT_WINDUP));
        assert_eq!(s.integral.x, DEFAULT_WINDUP);
    }

    #[test]
    fn command_validation() {
        assert!(PilotCommand { roll: 1.0, ..Default::default() }.validate().is_err());
        assert!(PilotCommand { mu: 5, ..Default::default() }.validate().is_err());
        assert!(PilotCommand::default().validate().is_ok());
    }
}
