//! Rigid-body plant of the '+' frame with quaternion attitude.
//!
//! Inertial frame is z-up. `attitude` rotates body vectors into the
//! inertial frame. Rotor 1 sits on -x, 2 on -y, 3 on +x, 4 on +y.

use nalgebra::{Matrix3, Matrix4, Quaternion, UnitQuaternion, Vector3, Vector4};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid vehicle parameter: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    pub mass: f64,
    pub inertia: Matrix3<f64>,
    /// Centre-to-rotor distance [m].
    pub arm: f64,
    pub gravity: f64,
    /// Sign of each rotor's reaction torque about body z.
    pub spin: [f64; 4],
    /// Servo neutral pulse width per actuator [us].
    pub zeta0: [f64; 4],
    /// First-order motor time constant [s]; zero disables the lag.
    pub motor_tau: f64,
}

impl VehicleParams {
    /// 626 g prototype with 550 mm motor-to-motor spacing.
    pub fn prototype() -> Self {
        Self {
            mass: 0.626,
            inertia: Matrix3::from_diagonal(&Vector3::new(8e-3, 8e-3, 1.4e-2)),
            arm: 0.275,
            gravity: 9.81,
            spin: [-1.0, 1.0, -1.0, 1.0],
            zeta0: [1500.0; 4],
            motor_tau: 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.mass > 0.0) {
            return Err(DynamicsError::InvalidParams("mass must be positive"));
        }
        if !(self.arm > 0.0) {
            return Err(DynamicsError::InvalidParams("arm must be positive"));
        }
        if (self.inertia - self.inertia.transpose()).abs().max() > 1e-12 {
            return Err(DynamicsError::InvalidParams("inertia must be symmetric"));
        }
        if self.inertia.cholesky().is_none() {
            return Err(DynamicsError::InvalidParams("inertia must be positive definite"));
        }
        if self.spin.iter().any(|s| s.abs() != 1.0) {
            return Err(DynamicsError::InvalidParams("spin signs must be +-1"));
        }
        if !(self.gravity >= 0.0 && self.motor_tau >= 0.0) {
            return Err(DynamicsError::InvalidParams("gravity and motor_tau must be non-negative"));
        }
        Ok(())
    }

    pub fn rotor_positions(&self) -> [Vector3<f64>; 4] {
        let d = self.arm;
        [
            Vector3::new(-d, 0.0, 0.0),
            Vector3::new(0.0, -d, 0.0),
            Vector3::new(d, 0.0, 0.0),
            Vector3::new(0.0, d, 0.0),
        ]
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::prototype()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub attitude: UnitQuaternion<f64>,
    /// Body angular rate [rad/s].
    pub rate: Vector3<f64>,
}

impl RigidBodyState {
    pub fn at_rest(altitude: f64) -> Self {
        Self {
            position: Vector3::new(0.0, 0.0, altitude),
            velocity: Vector3::zeros(),
            attitude: UnitQuaternion::identity(),
            rate: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).chain(self.rate.iter()).all(|v| v.is_finite())
            && self.attitude.coords.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyWrench {
    pub moment: Vector3<f64>,
    /// Collective thrust along body z, signed [N].
    pub thrust: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub attitude: Quaternion<f64>,
    pub angular_acceleration: Vector3<f64>,
}

/// Mixer rows `(m_x, m_y, m_z, T)` for per-rotor yaw coefficients.
pub fn mixer_matrix(arm: f64, yaw: [f64; 4]) -> Matrix4<f64> {
    let d = arm;
    Matrix4::new(
        0.0, -d, 0.0, d, //
        d, 0.0, -d, 0.0, //
        yaw[0], yaw[1], yaw[2], yaw[3], //
        1.0, 1.0, 1.0, 1.0,
    )
}

/// Wrench from rotor thrusts through the torque-ratio mixer.
pub fn mixer_forward<E>(
    params: &VehicleParams,
    thrusts: [f64; 4],
    gammas: [f64; 4],
    mut k_tau: impl FnMut(f64) -> Result<f64, E>,
) -> Result<BodyWrench, E> {
    let mut yaw = [0.0; 4];
    for i in 0..4 {
        yaw[i] = params.spin[i] * k_tau(gammas[i])?;
    }
    let w = mixer_matrix(params.arm, yaw) * Vector4::from(thrusts);
    Ok(BodyWrench { moment: Vector3::new(w[0], w[1], w[2]), thrust: w[3] })
}

/// Wrench from rotor thrusts and shaft torque magnitudes at their mounts.
pub fn rotor_wrench(params: &VehicleParams, thrusts: [f64; 4], torques: [f64; 4]) -> BodyWrench {
    let mut moment = Vector3::zeros();
    for (i, r) in params.rotor_positions().iter().enumerate() {
        moment += r.cross(&Vector3::new(0.0, 0.0, thrusts[i]));
        moment.z += params.spin[i] * torques[i];
    }
    BodyWrench { moment, thrust: thrusts.iter().sum() }
}

pub fn state_derivative(params: &VehicleParams, state: &RigidBodyState, wrench: &BodyWrench) -> StateDerivative {
    derivative(params, &state.velocity, state.attitude.quaternion(), &state.rate, wrench)
}

fn derivative(
    params: &VehicleParams,
    velocity: &Vector3<f64>,
    q: &Quaternion<f64>,
    w: &Vector3<f64>,
    wrench: &BodyWrench,
) -> StateDerivative {
    let rot = UnitQuaternion::new_unchecked(*q);
    let thrust = rot * Vector3::new(0.0, 0.0, wrench.thrust);
    let acceleration = thrust / params.mass - Vector3::new(0.0, 0.0, params.gravity);
    let iw = params.inertia * w;
    let inv = params.inertia.try_inverse().unwrap_or_else(Matrix3::zeros);
    let angular_acceleration = inv * (wrench.moment - w.cross(&iw));
    let attitude = q * Quaternion::from_parts(0.0, *w) * 0.5;
    StateDerivative { velocity: *velocity, acceleration, attitude, angular_acceleration }
}

/// One fixed RK4 step with a zero-order-hold wrench.
pub fn step(params: &VehicleParams, state: &RigidBodyState, wrench: &BodyWrench, dt: f64) -> RigidBodyState {
    step_with_norm(params, state, wrench, dt).0
}

/// Same as [`step`] but also returns the attitude norm before renormalization.
pub fn step_with_norm(params: &VehicleParams, state: &RigidBodyState, wrench: &BodyWrench, dt: f64) -> (RigidBodyState, f64) {
    let x0 = state.position;
    let v0 = state.velocity;
    let q0 = *state.attitude.quaternion();
    let w0 = state.rate;

    let k1 = derivative(params, &v0, &q0, &w0, wrench);
    let h = 0.5 * dt;
    let k2 = derivative(
        params,
        &(v0 + k1.acceleration * h),
        &(q0 + k1.attitude * h),
        &(w0 + k1.angular_acceleration * h),
        wrench,
    );
    let k3 = derivative(
        params,
        &(v0 + k2.acceleration * h),
        &(q0 + k2.attitude * h),
        &(w0 + k2.angular_acceleration * h),
        wrench,
    );
    let k4 = derivative(
        params,
        &(v0 + k3.acceleration * dt),
        &(q0 + k3.attitude * dt),
        &(w0 + k3.angular_acceleration * dt),
        wrench,
    );
    let s = dt / 6.0;
    let position = x0 + (k1.velocity + (k2.velocity + k3.velocity) * 2.0 + k4.velocity) * s;
    let velocity = v0 + (k1.acceleration + (k2.acceleration + k3.acceleration) * 2.0 + k4.acceleration) * s;
    let q = q0 + (k1.attitude + (k2.attitude + k3.attitude) * 2.0 + k4.attitude) * s;
    let rate = w0
        + (k1.angular_acceleration + (k2.angular_acceleration + k3.angular_acceleration) * 2.0 + k4.angular_acceleration)
            * s;
    let norm = q.norm();
    (RigidBodyState { position, velocity, attitude: UnitQuaternion::from_quaternion(q), rate }, norm)
}

/// Discrete first-order lag toward `command`.
pub fn motor_lag(actual: f64, command: f64, dt: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        command
    } else {
        actual + (command - actual) * (1.0 - (-dt / tau).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn mixer_oracle(d: f64, k: [f64; 4], t: [f64; 4]) -> [f64; 4] {
        [
            d * (t[3] - t[1]),
            d * (t[0] - t[2]),
            -k[0] * t[0] + k[1] * t[1] - k[2] * t[2] + k[3] * t[3],
            t[0] + t[1] + t[2] + t[3],
        ]
    }

    #[test]
    fn mixer_symmetric_thrusts() {
        let p = VehicleParams::prototype();
        let w = mixer_forward(&p, [1.5; 4], [0.2; 4], |_| Ok::<_, ()>(0.012)).unwrap();
        assert_eq!(w.moment, Vector3::zeros());
        assert_eq!(w.thrust, 6.0);
        let w = mixer_forward(&p, [1.7, 1.5, 1.3, 1.5], [0.2; 4], |_| Ok::<_, ()>(0.012)).unwrap();
        assert!((w.moment.y - 2.0 * p.arm * 0.2).abs() < 1e-12);
        assert!(w.moment.x.abs() < 1e-15);
    }

    #[test]
    fn mixer_matches_explicit_product() {
        let p = VehicleParams::prototype();
        let t = [1.1, -0.4, 2.3, 0.7];
        let g = [0.1, -0.2, 0.3, 0.15];
        let kt = |g: f64| Ok::<_, ()>(0.01 + 0.02 * g * g);
        let w = mixer_forward(&p, t, g, kt).unwrap();
        let k = g.map(|g| kt(g).unwrap());
        let o = mixer_oracle(p.arm, k, t);
        assert!((w.moment.x - o[0]).abs() < 1e-12);
        assert!((w.moment.y - o[1]).abs() < 1e-12);
        assert!((w.moment.z - o[2]).abs() < 1e-12);
        assert!((w.thrust - o[3]).abs() < 1e-12);
    }

    #[test]
    fn rotor_wrench_matches_mixer_for_positive_thrust() {
        let p = VehicleParams::prototype();
        let t = [1.1, 0.4, 2.3, 0.7];
        let k = 0.012;
        let w1 = rotor_wrench(&p, t, t.map(|t| k * t));
        let w2 = mixer_forward(&p, t, [0.0; 4], |_| Ok::<_, ()>(k)).unwrap();
        assert!((w1.moment - w2.moment).norm() < 1e-15);
    }

    #[test]
    fn hover_and_inverted_balance() {
        let p = VehicleParams::prototype();
        let s = RigidBodyState::at_rest(1.0);
        let d = state_derivative(&p, &s, &BodyWrench { moment: Vector3::zeros(), thrust: p.weight() });
        assert!(d.acceleration.norm() < 1e-15 && d.angular_acceleration.norm() == 0.0);

        let inv = RigidBodyState { attitude: UnitQuaternion::from_euler_angles(PI, 0.0, 0.0), ..s };
        let d = state_derivative(&p, &inv, &BodyWrench { moment: Vector3::zeros(), thrust: -p.weight() });
        assert!(d.acceleration.norm() < 1e-12);
    }

    #[test]
    fn euler_equations_torque_free() {
        let p = VehicleParams { inertia: Matrix3::from_diagonal(&Vector3::new(0.01, 0.02, 0.03)), ..VehicleParams::prototype() };
        let s = RigidBodyState { rate: Vector3::new(0.3, -1.2, 2.0), ..RigidBodyState::at_rest(0.0) };
        let d = state_derivative(&p, &s, &BodyWrench::default());
        let (i1, i2, i3) = (0.01, 0.02, 0.03);
        let (w1, w2, w3) = (0.3, -1.2, 2.0);
        let expect = Vector3::new((i2 - i3) * w2 * w3 / i1, (i3 - i1) * w3 * w1 / i2, (i1 - i2) * w1 * w2 / i3);
        assert!((d.angular_acceleration - expect).norm() < 1e-12);
    }

    #[test]
    fn zero_wrench_zero_gravity_is_fixed_point() {
        let p = VehicleParams { gravity: 0.0, ..VehicleParams::prototype() };
        let s = RigidBodyState::at_rest(2.0);
        assert_eq!(step(&p, &s, &BodyWrench::default(), 1e-3), s);
    }

    #[test]
    fn single_axis_spin_up() {
        let p = VehicleParams::prototype();
        let c = 0.02;
        let wrench = BodyWrench { moment: Vector3::new(c, 0.0, 0.0), thrust: p.weight() };
        let mut s = RigidBodyState::at_rest(0.0);
        for _ in 0..100 {
            s = step(&p, &s, &wrench, 1e-3);
        }
        assert!((s.rate.x - c * 0.1 / 8e-3).abs() < 1e-9);
    }

    #[test]
    fn free_fall() {
        let p = VehicleParams::prototype();
        let mut s = RigidBodyState::at_rest(10.0);
        for _ in 0..500 {
            s = step(&p, &s, &BodyWrench::default(), 1e-3);
        }
        assert!((s.position.z - (10.0 - 0.5 * 9.81 * 0.25)).abs() < 1e-9);
    }

    #[test]
    fn motor_lag_limits() {
        assert_eq!(motor_lag(1.0, 5.0, 1e-3, 0.0), 5.0);
        let a = motor_lag(0.0, 1.0, 0.05, 0.05);
        assert!((a - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(VehicleParams::prototype().validate().is_ok());
        let mut p = VehicleParams::prototype();
        p.inertia[(0, 1)] = 1e-3;
        assert!(p.validate().is_err());
        let p = VehicleParams { mass: 0.0, ..VehicleParams::prototype() };
        assert!(p.validate().is_err());
    }
}
