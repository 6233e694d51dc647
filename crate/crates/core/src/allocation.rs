//! Reconfigurable control allocation.
//!
//! A wrench demand is inverted through the mixer masked by the fault matrix
//! `F(mu)`. Healthy flight holds all pitches fixed and allocates thrust; with
//! one actuator lost, the actuator opposite to it also supplies the yaw torque
//! and flies near zero-thrust pitch. Network surrogates turn thrust and torque
//! demands into speed and pitch commands.

use core::f64::consts::PI;

use nalgebra::{Matrix4, Vector3, Vector4};
use thiserror::Error;

use crate::dynamics::mixer_matrix;
use crate::nn::MlpModel;
use crate::propeller::{PropellerError, RotorMap, RPM_TO_RAD_S};

/// Allocation matrices with a smaller reciprocal condition number are rejected.
pub const MIN_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AllocationError {
    #[error("allocation matrix is singular for mu = {mu}, gammas = {gammas:?} (condition {condition})")]
    SingularAllocation { mu: u8, gammas: [f64; 4], condition: f64 },
    #[error("failed-actuator index {0} is not in 0..=4")]
    BadActuator(u8),
    #[error("torque ratio of the failed actuator must be positive, got {0}")]
    BadTorqueRatio(f64),
    #[error("invalid limits: {0}")]
    InvalidLimits(&'static str),
    #[error("network shape does not fit its role: {0}")]
    BadModel(&'static str),
    #[error(transparent)]
    Propeller(#[from] PropellerError),
}

/// 1-based index of the actuator across the frame from `i`.
pub fn opposite(i: usize) -> usize {
    (i + 1) % 4 + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultMatrix {
    pub f: Matrix4<f64>,
    pub mu: u8,
}

/// Element mask for failed actuator `mu`; `k_tau_mu` is its torque ratio
/// at the pitch frozen when it failed.
pub fn fault_matrix(mu: u8, k_tau_mu: f64) -> Result<FaultMatrix, AllocationError> {
    let mut f = Matrix4::repeat(1.0);
    if mu > 4 {
        return Err(AllocationError::BadActuator(mu));
    }
    if mu != 0 {
        if !(k_tau_mu > 0.0 && k_tau_mu.is_finite()) {
            return Err(AllocationError::BadTorqueRatio(k_tau_mu));
        }
        let c = mu as usize - 1;
        let o = opposite(mu as usize) - 1;
        f[(0, c)] = 0.0;
        f[(1, c)] = 0.0;
        f[(3, c)] = 0.0;
        f[(2, c)] = 1.0 / k_tau_mu;
        f[(2, o)] = 0.0;
        f[(3, o)] = 0.0;
    }
    Ok(FaultMatrix { f, mu })
}

/// Mixer geometry used by the allocator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixerGeometry {
    pub arm: f64,
    pub spin: [f64; 4],
}

/// `C_a o F` with yaw entries evaluated only where the mask is non-zero.
pub fn masked_matrix<E>(
    geom: &MixerGeometry,
    fault: &FaultMatrix,
    gammas: [f64; 4],
    mut k_tau: impl FnMut(f64) -> Result<f64, E>,
) -> Result<Matrix4<f64>, E> {
    let mut yaw = [0.0; 4];
    for i in 0..4 {
        if fault.f[(2, i)] != 0.0 {
            yaw[i] = geom.spin[i] * k_tau(gammas[i])?;
        }
    }
    Ok(mixer_matrix(geom.arm, yaw).component_mul(&fault.f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    /// Thrust demands, or for the faulted column the opposite actuator's torque.
    pub y: Vector4<f64>,
    /// 2-norm condition number of the inverted matrix.
    pub condition: f64,
}

/// Solves `(C_a o F) y = [m_B; T]`.
pub fn allocate(
    geom: &MixerGeometry,
    moment: &Vector3<f64>,
    thrust: f64,
    fault: &FaultMatrix,
    gammas: [f64; 4],
    k_tau: impl FnMut(f64) -> Result<f64, PropellerError>,
) -> Result<Allocation, AllocationError> {
    let m = masked_matrix(geom, fault, gammas, k_tau)?;
    let sv = m.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let singular = AllocationError::SingularAllocation { mu: fault.mu, gammas, condition };
    if !(smin > MIN_RCOND * smax) {
        return Err(singular);
    }
    let w = Vector4::new(moment.x, moment.y, moment.z, thrust);
    let y = m.lu().solve(&w).ok_or(singular)?;
    Ok(Allocation { y, condition })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorLimits {
    pub omega_min: f64,
    pub omega_max: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Speed slew limit [rad/s^2].
    pub omega_rate: f64,
    /// Pitch slew limit [rad/s].
    pub gamma_rate: f64,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        Self {
            omega_min: 1000.0 * RPM_TO_RAD_S,
            omega_max: 15000.0 * RPM_TO_RAD_S,
            gamma_min: (-30f64).to_radians(),
            gamma_max: 30f64.to_radians(),
            omega_rate: 2000.0 * RPM_TO_RAD_S / 0.01,
            gamma_rate: DEFAULT_PITCH_SLEW,
        }
    }
}

/// Default pitch-command slew [rad/s].
pub const DEFAULT_PITCH_SLEW: f64 = 120.0 * PI / 180.0;

impl ActuatorLimits {
    pub fn validate(&self) -> Result<(), AllocationError> {
        if !(0.0 <= self.omega_min && self.omega_min < self.omega_max) {
            return Err(AllocationError::InvalidLimits("need 0 <= omega_min < omega_max"));
        }
        if !(self.gamma_min < self.gamma_max) {
            return Err(AllocationError::InvalidLimits("need gamma_min < gamma_max"));
        }
        if !(self.omega_rate > 0.0 && self.gamma_rate > 0.0) {
            return Err(AllocationError::InvalidLimits("rate limits must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorCommand {
    /// Rotor speed [rad/s].
    pub omega: [f64; 4],
    pub gamma: [f64; 4],
    /// Motors switched off are commanded to zero speed.
    pub enabled: [bool; 4],
}

impl ActuatorCommand {
    pub fn uniform(omega: f64, gamma: f64) -> Self {
        Self { omega: [omega; 4], gamma: [gamma; 4], enabled: [true; 4] }
    }

    /// Motor PWM on the linear `[1000, 2000] us <-> [0, omega_max]` map.
    pub fn motor_pwm(&self, omega_max: f64) -> [f64; 4] {
        self.omega.map(|w| 1000.0 + 1000.0 * w / omega_max)
    }
}

fn slew(prev: f64, target: f64, max_step: f64) -> f64 {
    prev + (target - prev).clamp(-max_step, max_step)
}

/// Box and slew-rate limiting of a raw command.
pub fn limit(limits: &ActuatorLimits, prev: &ActuatorCommand, raw: &ActuatorCommand, dt: f64) -> ActuatorCommand {
    let mut out = *raw;
    for i in 0..4 {
        let g = raw.gamma[i].clamp(limits.gamma_min, limits.gamma_max);
        out.gamma[i] = slew(prev.gamma[i], g, limits.gamma_rate * dt).clamp(limits.gamma_min, limits.gamma_max);
        out.omega[i] = if raw.enabled[i] {
            let w = raw.omega[i].clamp(limits.omega_min, limits.omega_max);
            slew(prev.omega[i], w, limits.omega_rate * dt).clamp(limits.omega_min, limits.omega_max)
        } else {
            0.0
        };
    }
    out
}

/// Speed for a thrust demand at a pitch.
pub fn nn1_infer(model: &MlpModel, thrust: f64, gamma: f64) -> (f64, bool) {
    let p = model.predict(&[thrust, gamma]);
    (p.outputs[0], p.clamped)
}

/// `(gamma, omega)` for a thrust and torque demand.
pub fn nn2_infer(model: &MlpModel, thrust: f64, torque: f64) -> (f64, f64, bool) {
    let p = model.predict(&[thrust, torque]);
    (p.outputs[0], p.outputs[1], p.clamped)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationStrategy {
    /// Fixed pitch of every actuator in healthy upright flight.
    pub nominal_pitch: f64,
    /// Fixed pitch of the remaining pair after a failure.
    pub fault_pitch: f64,
    /// Pitch of zero thrust, used for sign feasibility.
    pub zero_thrust_pitch: f64,
    pub limits: ActuatorLimits,
    /// Pitch error below which the opposite actuator switches from
    /// thrust-priority to the torque network's speed [rad].
    pub capture_band: f64,
}

impl AllocationStrategy {
    pub fn new(zero_thrust_pitch: f64) -> Self {
        Self {
            nominal_pitch: 12f64.to_radians(),
            fault_pitch: 12f64.to_radians(),
            zero_thrust_pitch,
            limits: ActuatorLimits::default(),
            capture_band: 2f64.to_radians(),
        }
    }

    pub fn validate(&self) -> Result<(), AllocationError> {
        self.limits.validate()?;
        let l = &self.limits;
        for g in [self.nominal_pitch, -self.nominal_pitch, self.fault_pitch] {
            if !(l.gamma_min..=l.gamma_max).contains(&g) {
                return Err(AllocationError::InvalidLimits("fixed pitches must lie within the limits"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocatorOutput {
    pub y: Vector4<f64>,
    pub condition: f64,
    pub raw: ActuatorCommand,
    pub command: ActuatorCommand,
    /// Some network input was clamped to its training box.
    pub clamped: bool,
}

/// Allocation plus network inference and limiting, with the limiter memory.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlAllocator {
    pub strategy: AllocationStrategy,
    pub geometry: MixerGeometry,
    pub nn1: MlpModel,
    pub nn2: MlpModel,
    /// Torque-ratio source for the mixer model.
    pub rotor: RotorMap,
    prev: ActuatorCommand,
    frozen: Option<(u8, f64)>,
}

impl ControlAllocator {
    pub fn new(
        strategy: AllocationStrategy,
        geometry: MixerGeometry,
        nn1: MlpModel,
        nn2: MlpModel,
        rotor: RotorMap,
        initial: ActuatorCommand,
    ) -> Result<Self, AllocationError> {
        strategy.validate()?;
        if nn1.n_in != 2 || nn1.n_out != 1 {
            return Err(AllocationError::BadModel("NN1 must map 2 inputs to 1 output"));
        }
        if nn2.n_in != 2 || nn2.n_out != 2 {
            return Err(AllocationError::BadModel("NN2 must map 2 inputs to 2 outputs"));
        }
        Ok(Self { strategy, geometry, nn1, nn2, rotor, prev: initial, frozen: None })
    }

    pub fn previous(&self) -> &ActuatorCommand {
        &self.prev
    }

    /// Torque ratio signed by the thrust direction the pitch produces.
    fn signed_k_tau(&self, gamma: f64) -> Result<f64, PropellerError> {
        let k = self.rotor.k_tau(gamma)?;
        Ok(if gamma >= self.strategy.zero_thrust_pitch { k } else { -k })
    }

    /// Speed for thrust `t` at pitch `gamma`, or the idle speed when the pitch
    /// cannot produce that thrust direction.
    fn thrust_speed(&self, t: f64, gamma: f64, clamped: &mut bool) -> f64 {
        if t * (gamma - self.strategy.zero_thrust_pitch) <= 0.0 {
            return self.strategy.limits.omega_min;
        }
        let (w, c) = nn1_infer(&self.nn1, t, gamma);
        *clamped |= c;
        w
    }

    pub fn command(
        &mut self,
        moment: &Vector3<f64>,
        collective: f64,
        mu: u8,
        dt: f64,
    ) -> Result<AllocatorOutput, AllocationError> {
        if mu > 4 {
            return Err(AllocationError::BadActuator(mu));
        }
        let lim = self.strategy.limits;
        let prev = self.prev;
        let step = lim.gamma_rate * dt;
        let toward = |i: usize, target: f64| slew(prev.gamma[i], target.clamp(lim.gamma_min, lim.gamma_max), step);
        let mut clamped = false;
        let mut raw = ActuatorCommand { omega: [0.0; 4], gamma: prev.gamma, enabled: [true; 4] };

        let (y, condition) = if mu == 0 {
            self.frozen = None;
            let target = if collective >= 0.0 { self.strategy.nominal_pitch } else { -self.strategy.nominal_pitch };
            // The mixer model uses the fixed pitch being slewed to; the value
            // in transit can sit at zero thrust where k_tau is undefined.
            let fault = fault_matrix(0, 0.0)?;
            let a = allocate(&self.geometry, moment, collective, &fault, [target; 4], |g| self.signed_k_tau(g))?;
            for i in 0..4 {
                raw.gamma[i] = target;
                raw.omega[i] = self.thrust_speed(a.y[i], toward(i, target), &mut clamped);
            }
            (a.y, a.condition)
        } else {
            let m = mu as usize - 1;
            let frozen = match self.frozen {
                Some((f, g)) if f == mu => g,
                _ => prev.gamma[m],
            };
            self.frozen = Some((mu, frozen));
            let o = opposite(mu as usize) - 1;
            let pair = [0, 1, 2, 3].into_iter().filter(move |i| *i != m && *i != o);
            let mut gammas = [self.strategy.fault_pitch; 4];
            gammas[m] = frozen;
            gammas[o] = prev.gamma[o];
            let fault = fault_matrix(mu, self.rotor.k_tau(frozen)?)?;
            let a = allocate(&self.geometry, moment, collective, &fault, gammas, |g| self.signed_k_tau(g))?;
            for i in pair {
                raw.gamma[i] = self.strategy.fault_pitch;
                raw.omega[i] = self.thrust_speed(a.y[i], toward(i, self.strategy.fault_pitch), &mut clamped);
            }
            // Torque demands beyond what the actuator gives near zero thrust
            // lie outside the network's data.
            let zt = self.strategy.zero_thrust_pitch;
            let tau = a.y[m].clamp(self.rotor.torque(zt, lim.omega_min), self.rotor.torque(zt, lim.omega_max));
            let (g_nn, w_nn, c) = nn2_infer(&self.nn2, a.y[o], tau);
            clamped |= c;
            let g_lim = toward(o, g_nn);
            raw.gamma[o] = g_nn;
            raw.omega[o] = if (g_lim - g_nn).abs() <= self.strategy.capture_band {
                w_nn
            } else {
                self.thrust_speed(a.y[o], g_lim, &mut clamped)
            };
            raw.gamma[m] = frozen;
            raw.enabled[m] = false;
            (a.y, a.condition)
        };

        let command = limit(&lim, &prev, &raw, dt);
        self.prev = command;
        Ok(AllocatorOutput { y, condition, raw, command, clamped })
    }
}

/// Whether a three-actuator hover can hold yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoverFeasibility {
    /// Thrust of each actuator in the fixed-pitch pair [N].
    pub pair_thrust: f64,
    pub pair_speed: f64,
    /// Yaw torque the opposite actuator must cancel [N m].
    pub demanded_torque: f64,
    /// Largest torque available at zero-thrust pitch within the speed limit.
    pub max_zero_thrust_torque: f64,
    pub feasible: bool,
}

/// Checks the failed-actuator hover equilibrium, upright or inverted.
pub fn fault_hover_feasibility(
    rotor: &RotorMap,
    weight: f64,
    strategy: &AllocationStrategy,
    inverted: bool,
) -> HoverFeasibility {
    let (pitch, thrust) = if inverted {
        (-strategy.fault_pitch, -0.5 * weight)
    } else {
        (strategy.fault_pitch, 0.5 * weight)
    };
    let speed = rotor.omega_for_thrust(pitch, thrust).unwrap_or(f64::INFINITY);
    let demanded_torque = 2.0 * rotor.torque(pitch, speed);
    let max_zero_thrust_torque = rotor.torque(strategy.zero_thrust_pitch, strategy.limits.omega_max);
    HoverFeasibility {
        pair_thrust: thrust,
        pair_speed: speed,
        demanded_torque,
        max_zero_thrust_torque,
        feasible: speed <= strategy.limits.omega_max && demanded_torque <= max_zero_thrust_torque,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> MixerGeometry {
        MixerGeometry { arm: 0.275, spin: [-1.0, 1.0, -1.0, 1.0] }
    }

    #[test]
    fn opposite_indices() {
        assert_eq!([1, 2, 3, 4].map(opposite), [3, 4, 1, 2]);
    }

    #[test]
    fn fault_matrix_patterns() {
        assert_eq!(fault_matrix(0, 0.0).unwrap().f, Matrix4::repeat(1.0));
        let f = fault_matrix(4, 0.02).unwrap().f;
        for (r, c, v) in [(0, 3, 0.0), (1, 3, 0.0), (3, 3, 0.0), (2, 3, 50.0), (2, 1, 0.0), (3, 1, 0.0)] {
            assert!((f[(r, c)] - v).abs() < 1e-12, "({r},{c})");
        }
        let ones = f.iter().filter(|v| **v == 1.0).count();
        assert_eq!(ones, 10);
        let f1 = fault_matrix(1, 0.02).unwrap().f;
        assert_eq!(f1[(2, 0)], 50.0);
        assert_eq!((f1[(2, 2)], f1[(3, 2)], f1[(0, 0)]), (0.0, 0.0, 0.0));
        assert!(fault_matrix(2, 0.0).is_err());
        assert!(fault_matrix(5, 0.1).is_err());
    }

    #[test]
    fn symmetric_allocation() {
        let f = fault_matrix(0, 0.0).unwrap();
        let a = allocate(&geom(), &Vector3::zeros(), 8.0, &f, [0.2; 4], |_| Ok(0.012)).unwrap();
        assert!((a.y - Vector4::repeat(2.0)).norm() < 1e-12);
    }

    #[test]
    fn fault_structure_mu4() {
        let k = [0.011, 0.0, 0.013, 0.02];
        let f = fault_matrix(4, k[3]).unwrap();
        let gammas = [0.2, -0.04, 0.21, 0.19];
        let kt = |g: f64| Ok(if g == 0.2 { k[0] } else if g == 0.21 { k[2] } else { k[3] });
        let (mx, my, mz, t) = (0.03, -0.02, 0.01, 6.0);
        let a = allocate(&geom(), &Vector3::new(mx, my, mz), t, &f, gammas, kt).unwrap();
        let d = 0.275;
        assert!((a.y[1] + mx / d).abs() < 1e-12);
        assert!((a.y[0] + a.y[2] - t).abs() < 1e-12);
        assert!((a.y[0] - a.y[2] - my / d).abs() < 1e-12);
        assert!((-k[0] * a.y[0] - k[2] * a.y[2] + a.y[3] - mz).abs() < 1e-12);
    }

    #[test]
    fn singular_reported() {
        let f = fault_matrix(0, 0.0).unwrap();
        let r = allocate(&geom(), &Vector3::zeros(), 1.0, &f, [0.2; 4], |_| Ok(0.0));
        assert!(matches!(r, Err(AllocationError::SingularAllocation { mu: 0, .. })));
    }

    #[test]
    fn limiter_contract() {
        let l = ActuatorLimits::default();
        let prev = ActuatorCommand::uniform(600.0, 0.2);
        assert_eq!(limit(&l, &prev, &prev, 1e-3), prev);
        let high = ActuatorCommand { omega: [1e5; 4], ..prev };
        let stepped = limit(&l, &ActuatorCommand::uniform(l.omega_max, 0.2), &high, 1e-3);
        assert_eq!(stepped.omega, [l.omega_max; 4]);
        let jump = ActuatorCommand::uniform(1200.0, 0.4);
        let out = limit(&l, &prev, &jump, 1e-3);
        assert!((out.omega[0] - (600.0 + l.omega_rate * 1e-3)).abs() < 1e-9);
        assert!((out.gamma[0] - (0.2 + l.gamma_rate * 1e-3)).abs() < 1e-12);
        let mut off = prev;
        off.enabled[3] = false;
        assert_eq!(limit(&l, &prev, &off, 1e-3).omega[3], 0.0);
    }
}
