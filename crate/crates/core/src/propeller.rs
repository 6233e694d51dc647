//! Blade element momentum model of the untwisted variable-pitch rotor.
//!
//! Each annulus balances blade-element thrust against momentum thrust
//! `4 pi rho v |v| r dr`. The signed form covers negative-thrust pitch
//! settings with upward inflow. Static (hover) inflow only.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numeric::{self, interp};

pub const RHO_DEFAULT: f64 = 1.22;
/// Per-element thrust balance tolerance [N].
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Internal target, well inside the contract tolerance so that totals stay
/// smooth near zero thrust.
const SOLVE_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 200;
/// Relaxation of the inflow fixed-point iteration.
pub const RELAXATION: f64 = 0.5;
/// Below this thrust magnitude the torque ratio is undefined [N].
pub const THRUST_FLOOR: f64 = 1e-3;

pub const RPM_TO_RAD_S: f64 = PI / 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PropellerError {
    #[error("inflow did not converge at r = {r} m (residual {residual} N)")]
    NoConvergence { r: f64, residual: f64, element: usize },
    #[error("thrust {thrust} N is below the torque-ratio floor")]
    ThrustNearZero { thrust: f64 },
    #[error("thrust does not change sign on the pitch bracket")]
    NoSignChange,
    #[error("invalid operating point: {0}")]
    InvalidOperatingPoint(&'static str),
    #[error("invalid blade geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("invalid airfoil polar: {0}")]
    InvalidPolar(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BladeGeometry {
    pub r_min: f64,
    pub r_max: f64,
    /// Radii of the chord samples, strictly increasing [m].
    pub chord_r: Vec<f64>,
    pub chord_c: Vec<f64>,
    pub n_blades: u32,
    pub n_elements: usize,
}

impl BladeGeometry {
    /// Two-bladed 9-inch prototype blade.
    pub fn prototype() -> Self {
        Self {
            r_min: 0.02,
            r_max: 0.1143,
            chord_r: alloc::vec![0.02, 0.045, 0.08, 0.1143],
            chord_c: alloc::vec![0.018, 0.024, 0.020, 0.012],
            n_blades: 2,
            n_elements: 40,
        }
    }

    pub fn validate(&self) -> Result<(), PropellerError> {
        if !(self.r_min >= 0.0 && self.r_min < self.r_max) {
            return Err(PropellerError::InvalidGeometry("need 0 <= r_min < r_max"));
        }
        if self.chord_r.is_empty() || self.chord_r.len() != self.chord_c.len() {
            return Err(PropellerError::InvalidGeometry("chord table is empty or ragged"));
        }
        if self.chord_r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PropellerError::InvalidGeometry("chord radii must increase"));
        }
        if self.chord_c.iter().any(|c| !(*c > 0.0)) {
            return Err(PropellerError::InvalidGeometry("chords must be positive"));
        }
        if self.n_blades == 0 {
            return Err(PropellerError::InvalidGeometry("n_blades must be at least 1"));
        }
        if self.n_elements < 10 {
            return Err(PropellerError::InvalidGeometry("n_elements must be at least 10"));
        }
        Ok(())
    }

    pub fn chord(&self, r: f64) -> f64 {
        interp(&self.chord_r, &self.chord_c, r)
    }

    pub fn with_elements(&self, n: usize) -> Self {
        Self { n_elements: n, ..self.clone() }
    }
}

/// Closed-form polar: linear lift clamped at stall, quadratic drag bucket,
/// constant pitching moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricPolar {
    pub cl0: f64,
    /// Lift slope [1/rad].
    pub cl_alpha: f64,
    /// Stall angle [rad]; `Cl` is held beyond `+-alpha_stall`.
    pub alpha_stall: f64,
    pub cd0: f64,
    pub k_cd: f64,
    /// Angle of minimum drag [rad].
    pub alpha_cd: f64,
    pub cm0: f64,
}

impl ParametricPolar {
    /// Cambered section calibrated for the prototype rotor.
    pub fn cambered() -> Self {
        Self {
            cl0: 0.25,
            cl_alpha: 2.0 * PI * 0.9,
            alpha_stall: 14f64.to_radians(),
            cd0: 0.03,
            k_cd: 3.0,
            alpha_cd: 0.1,
            cm0: -0.025,
        }
    }

    /// Symmetric section with the same lift slope and an even drag polar.
    pub fn symmetric() -> Self {
        Self { cl0: 0.0, alpha_cd: 0.0, cm0: 0.0, ..Self::cambered() }
    }
}

impl Default for ParametricPolar {
    fn default() -> Self {
        Self::cambered()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRow {
    pub alpha: f64,
    pub cl: f64,
    pub cd: f64,
    pub cm: f64,
}

/// Interpolated polar table, clamped outside its alpha range.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarTable {
    alpha: Vec<f64>,
    cl: Vec<f64>,
    cd: Vec<f64>,
    cm: Vec<f64>,
}

impl PolarTable {
    pub fn new(rows: &[PolarRow]) -> Result<Self, PropellerError> {
        if rows.len() < 2 {
            return Err(PropellerError::InvalidPolar("table needs at least two rows"));
        }
        if rows.windows(2).any(|w| w[1].alpha <= w[0].alpha) {
            return Err(PropellerError::InvalidPolar("alpha must be strictly increasing"));
        }
        if rows.iter().any(|r| !(r.cd > 0.0) || !r.cl.is_finite() || !r.cm.is_finite()) {
            return Err(PropellerError::InvalidPolar("cd must be positive and values finite"));
        }
        Ok(Self {
            alpha: rows.iter().map(|r| r.alpha).collect(),
            cl: rows.iter().map(|r| r.cl).collect(),
            cd: rows.iter().map(|r| r.cd).collect(),
            cm: rows.iter().map(|r| r.cm).collect(),
        })
    }

    pub fn rows(&self) -> Vec<PolarRow> {
        (0..self.alpha.len())
            .map(|i| PolarRow { alpha: self.alpha[i], cl: self.cl[i], cd: self.cd[i], cm: self.cm[i] })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AirfoilModel {
    Parametric(ParametricPolar),
    Tabulated(PolarTable),
}

impl Default for AirfoilModel {
    fn default() -> Self {
        AirfoilModel::Parametric(ParametricPolar::cambered())
    }
}

impl AirfoilModel {
    pub fn validate(&self) -> Result<(), PropellerError> {
        match self {
            AirfoilModel::Parametric(p) => {
                if !(p.cd0 > 0.0 && p.k_cd >= 0.0 && p.alpha_stall > 0.0) {
                    return Err(PropellerError::InvalidPolar("need cd0 > 0, k_cd >= 0, alpha_stall > 0"));
                }
                Ok(())
            }
            AirfoilModel::Tabulated(_) => Ok(()),
        }
    }

    pub fn cl(&self, alpha: f64) -> f64 {
        match self {
            AirfoilModel::Parametric(p) => p.cl0 + p.cl_alpha * alpha.clamp(-p.alpha_stall, p.alpha_stall),
            AirfoilModel::Tabulated(t) => interp(&t.alpha, &t.cl, alpha),
        }
    }

    pub fn cd(&self, alpha: f64) -> f64 {
        match self {
            AirfoilModel::Parametric(p) => p.cd0 + p.k_cd * (alpha - p.alpha_cd).powi(2),
            AirfoilModel::Tabulated(t) => interp(&t.alpha, &t.cd, alpha),
        }
    }

    pub fn cm(&self, alpha: f64) -> f64 {
        match self {
            AirfoilModel::Parametric(p) => p.cm0,
            AirfoilModel::Tabulated(t) => interp(&t.alpha, &t.cm, alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub gamma: f64,
    /// Rotor speed [rad/s].
    pub omega: f64,
    pub rho: f64,
}

impl OperatingPoint {
    pub fn new(gamma: f64, omega: f64) -> Self {
        Self { gamma, omega, rho: RHO_DEFAULT }
    }

    pub fn from_rpm(gamma: f64, rpm: f64) -> Self {
        Self::new(gamma, rpm * RPM_TO_RAD_S)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementSolution {
    pub r: f64,
    pub dr: f64,
    /// Induced velocity, positive downward through the disk [m/s].
    pub v_i: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d_thrust: f64,
    pub d_torque: f64,
    pub d_moment: f64,
    /// Blade-element minus momentum thrust at `v_i` [N].
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotorSolution {
    pub elements: Vec<ElementSolution>,
    pub thrust: f64,
    /// Shaft torque magnitude [N m].
    pub torque: f64,
    /// Blade pitching moment about the feathering axis [N m].
    pub moment: f64,
    pub converged: bool,
}

struct Loads {
    alpha: f64,
    beta: f64,
    d_thrust: f64,
    d_torque: f64,
    d_moment: f64,
}

fn blade_loads(geom: &BladeGeometry, airfoil: &AirfoilModel, op: &OperatingPoint, r: f64, dr: f64, v: f64) -> Loads {
    let u = op.omega * r;
    let beta = v.atan2(u);
    let alpha = op.gamma - beta;
    let c = geom.chord(r);
    let qd = 0.5 * geom.n_blades as f64 * op.rho * (v * v + u * u) * c * dr;
    let (cl, cd) = (airfoil.cl(alpha), airfoil.cd(alpha));
    let (sb, cb) = beta.sin_cos();
    Loads {
        alpha,
        beta,
        d_thrust: qd * (cl * cb - cd * sb),
        d_torque: qd * (cl * sb + cd * cb) * r,
        d_moment: qd * airfoil.cm(alpha) * c,
    }
}

fn momentum_thrust(op: &OperatingPoint, r: f64, dr: f64, v: f64) -> f64 {
    4.0 * PI * op.rho * v * v.abs() * r * dr
}

/// Solves the inflow of one annulus of width `dr` centred at `r`.
pub fn solve_element(
    geom: &BladeGeometry,
    airfoil: &AirfoilModel,
    op: &OperatingPoint,
    r: f64,
    dr: f64,
) -> Result<ElementSolution, PropellerError> {
    if !(op.omega > 0.0) || !(dr > 0.0) || !(op.rho > 0.0) || !(r > 0.0) {
        return Err(PropellerError::InvalidOperatingPoint("need omega, rho, r, dr > 0"));
    }
    let residual = |v: f64| blade_loads(geom, airfoil, op, r, dr, v).d_thrust - momentum_thrust(op, r, dr, v);
    let finish = |v: f64| {
        let l = blade_loads(geom, airfoil, op, r, dr, v);
        ElementSolution {
            r,
            dr,
            v_i: v,
            alpha: l.alpha,
            beta: l.beta,
            d_thrust: l.d_thrust,
            d_torque: l.d_torque,
            d_moment: l.d_moment,
            residual: l.d_thrust - momentum_thrust(op, r, dr, v),
        }
    };

    let f0 = residual(0.0);
    if f0.abs() < SOLVE_TOL {
        return Ok(finish(0.0));
    }
    let s = f0.signum();
    let k = 4.0 * PI * op.rho * r * dr;

    let mut v = 0.0;
    for _ in 0..MAX_ITER {
        let t = blade_loads(geom, airfoil, op, r, dr, v).d_thrust;
        if (t - momentum_thrust(op, r, dr, v)).abs() < SOLVE_TOL {
            return Ok(finish(v));
        }
        let target = s * ((s * t).max(0.0) / k).sqrt();
        v = (1.0 - RELAXATION) * v + RELAXATION * target;
    }

    // Bisection on [0, hi] with the root on the side of sign s.
    let mut hi = s * op.omega * r;
    let mut grow = 0;
    while residual(hi).signum() == s && grow < 60 {
        hi *= 2.0;
        grow += 1;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let fm = residual(mid);
        if fm.abs() < SOLVE_TOL {
            return Ok(finish(mid));
        }
        if fm.signum() == s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    let fv = residual(v);
    if fv.abs() < RESIDUAL_TOL {
        return Ok(finish(v));
    }
    Err(PropellerError::NoConvergence { r, residual: fv, element: 0 })
}

/// Integrates thrust, shaft torque and pitching moment over the span.
pub fn rotor_solve(
    geom: &BladeGeometry,
    airfoil: &AirfoilModel,
    op: &OperatingPoint,
) -> Result<RotorSolution, PropellerError> {
    if !(op.omega >= 0.0) {
        return Err(PropellerError::InvalidOperatingPoint("omega must be non-negative"));
    }
    let n = geom.n_elements;
    let dr = (geom.r_max - geom.r_min) / n as f64;
    let mut elements = Vec::with_capacity(n);
    let (mut thrust, mut torque, mut moment) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let r = geom.r_min + (i as f64 + 0.5) * dr;
        let e = if op.omega == 0.0 {
            ElementSolution {
                r,
                dr,
                v_i: 0.0,
                alpha: op.gamma,
                beta: 0.0,
                d_thrust: 0.0,
                d_torque: 0.0,
                d_moment: 0.0,
                residual: 0.0,
            }
        } else {
            solve_element(geom, airfoil, op, r, dr).map_err(|e| match e {
                PropellerError::NoConvergence { r, residual, .. } => {
                    PropellerError::NoConvergence { r, residual, element: i }
                }
                other => other,
            })?
        };
        thrust += e.d_thrust;
        torque += e.d_torque;
        moment += e.d_moment;
        elements.push(e);
    }
    Ok(RotorSolution { elements, thrust, torque, moment, converged: true })
}

/// `|tau| / |T|` at a pitch and speed [m].
pub fn k_tau(geom: &BladeGeometry, airfoil: &AirfoilModel, gamma: f64, omega: f64) -> Result<f64, PropellerError> {
    let s = rotor_solve(geom, airfoil, &OperatingPoint::new(gamma, omega))?;
    torque_ratio(s.thrust, s.torque)
}

/// `|tau| / |T|`, rejecting thrusts inside the floor.
pub fn torque_ratio(thrust: f64, torque: f64) -> Result<f64, PropellerError> {
    if thrust.abs() < THRUST_FLOOR {
        return Err(PropellerError::ThrustNearZero { thrust });
    }
    Ok(torque.abs() / thrust.abs())
}

/// Pitch of zero thrust, searched on `[-15 deg, +15 deg]`.
pub fn zero_thrust_pitch(geom: &BladeGeometry, airfoil: &AirfoilModel, omega: f64) -> Result<f64, PropellerError> {
    let lim = 15f64.to_radians();
    numeric::bisect_root(
        |g| rotor_solve(geom, airfoil, &OperatingPoint::new(g, omega)).map(|s| s.thrust),
        -lim,
        lim,
        1e-14,
        200,
    )?
    .ok_or(PropellerError::NoSignChange)
}

/// Pitch-by-speed sampling plan for synthetic load-cell data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSweep {
    pub pitch_min: f64,
    pub pitch_max: f64,
    pub n_pitch: usize,
    /// Random speeds drawn per pitch, sorted ascending.
    pub n_rpm: usize,
    pub rpm_min: f64,
    pub rpm_max: f64,
    pub rho: f64,
    pub seed: u64,
}

impl Default for DatasetSweep {
    fn default() -> Self {
        Self {
            pitch_min: (-25f64).to_radians(),
            pitch_max: 25f64.to_radians(),
            n_pitch: 16,
            n_rpm: 20,
            rpm_min: 3000.0,
            rpm_max: 15000.0,
            rho: RHO_DEFAULT,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRow {
    pub gamma: f64,
    pub omega: f64,
    pub thrust: f64,
    pub torque: f64,
    pub moment: f64,
    pub converged: bool,
}

pub fn generate_actuator_dataset(geom: &BladeGeometry, airfoil: &AirfoilModel, sweep: &DatasetSweep) -> Vec<DatasetRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(sweep.seed);
    let mut rows = Vec::with_capacity(sweep.n_pitch * sweep.n_rpm);
    for i in 0..sweep.n_pitch {
        let gamma = if sweep.n_pitch == 1 {
            sweep.pitch_min
        } else {
            sweep.pitch_min + (sweep.pitch_max - sweep.pitch_min) * i as f64 / (sweep.n_pitch - 1) as f64
        };
        let mut rpms: Vec<f64> = (0..sweep.n_rpm).map(|_| rng.gen_range(sweep.rpm_min..=sweep.rpm_max)).collect();
        rpms.sort_by(f64::total_cmp);
        for rpm in rpms {
            let op = OperatingPoint { gamma, omega: rpm * RPM_TO_RAD_S, rho: sweep.rho };
            rows.push(match rotor_solve(geom, airfoil, &op) {
                Ok(s) => DatasetRow { gamma, omega: op.omega, thrust: s.thrust, torque: s.torque, moment: s.moment, converged: true },
                Err(_) => DatasetRow {
                    gamma,
                    omega: op.omega,
                    thrust: f64::NAN,
                    torque: f64::NAN,
                    moment: f64::NAN,
                    converged: false,
                },
            });
        }
    }
    rows
}

/// Thrust, torque and moment coefficients per `Omega^2` tabulated over pitch.
///
/// Hover inflow scales linearly with `Omega`, so these are exact up to the
/// pitch interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorMap {
    gammas: Vec<f64>,
    c_thrust: Vec<f64>,
    c_torque: Vec<f64>,
    c_moment: Vec<f64>,
}

impl RotorMap {
    pub const REFERENCE_OMEGA: f64 = 1000.0;

    pub fn build(
        geom: &BladeGeometry,
        airfoil: &AirfoilModel,
        rho: f64,
        gamma_min: f64,
        gamma_max: f64,
        n: usize,
    ) -> Result<Self, PropellerError> {
        let n = n.max(2);
        let w2 = Self::REFERENCE_OMEGA * Self::REFERENCE_OMEGA;
        let mut map = Self { gammas: Vec::new(), c_thrust: Vec::new(), c_torque: Vec::new(), c_moment: Vec::new() };
        for i in 0..n {
            let g = gamma_min + (gamma_max - gamma_min) * i as f64 / (n - 1) as f64;
            let s = rotor_solve(geom, airfoil, &OperatingPoint { gamma: g, omega: Self::REFERENCE_OMEGA, rho })?;
            map.gammas.push(g);
            map.c_thrust.push(s.thrust / w2);
            map.c_torque.push(s.torque / w2);
            map.c_moment.push(s.moment / w2);
        }
        Ok(map)
    }

    /// Default map over +-30 deg at 0.05 deg spacing.
    pub fn prototype() -> Result<Self, PropellerError> {
        let lim = 30f64.to_radians();
        Self::build(&BladeGeometry::prototype(), &AirfoilModel::default(), RHO_DEFAULT, -lim, lim, 1201)
    }

    pub fn pitch_range(&self) -> (f64, f64) {
        (self.gammas[0], self.gammas[self.gammas.len() - 1])
    }

    pub fn thrust(&self, gamma: f64, omega: f64) -> f64 {
        interp(&self.gammas, &self.c_thrust, gamma) * omega * omega
    }

    pub fn torque(&self, gamma: f64, omega: f64) -> f64 {
        interp(&self.gammas, &self.c_torque, gamma) * omega * omega
    }

    pub fn moment(&self, gamma: f64, omega: f64) -> f64 {
        interp(&self.gammas, &self.c_moment, gamma) * omega * omega
    }

    /// Torque ratio evaluated at the reference speed.
    pub fn k_tau(&self, gamma: f64) -> Result<f64, PropellerError> {
        let w = Self::REFERENCE_OMEGA;
        torque_ratio(self.thrust(gamma, w), self.torque(gamma, w))
    }

    /// Speed giving `thrust` at `gamma`, if the sign is reachable.
    pub fn omega_for_thrust(&self, gamma: f64, thrust: f64) -> Option<f64> {
        let ct = interp(&self.gammas, &self.c_thrust, gamma);
        if thrust == 0.0 {
            return Some(0.0);
        }
        (ct != 0.0 && ct.signum() == thrust.signum()).then(|| (thrust / ct).sqrt())
    }

    /// Pitch where the tabulated thrust coefficient crosses zero.
    pub fn zero_thrust_pitch(&self) -> Option<f64> {
        self.c_thrust.windows(2).position(|w| w[0] <= 0.0 && w[1] > 0.0).map(|i| {
            let (g0, g1) = (self.gammas[i], self.gammas[i + 1]);
            let (c0, c1) = (self.c_thrust[i], self.c_thrust[i + 1]);
            g0 - c0 * (g1 - g0) / (c1 - c0)
        })
    }
}
