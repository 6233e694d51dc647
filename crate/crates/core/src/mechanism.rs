//! Closed-loop kinematics of the RPRR pitch mechanism.
//!
//! The servo crank (angle `xi`) drives a slider, links 3 and 4 close the loop,
//! and link 4 carries the blade so its angle is the propeller pitch `gamma`.
//! Lengths are millimetres, angles radians.

use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

use crate::numeric;

/// Tolerance used to clamp `|C|` onto `[-1, 1]` at the workspace boundary.
pub const CLOSURE_CLAMP_TOL: f64 = 1e-12;
/// Configurations with `|sin eta3|` at or below this are treated as singular.
pub const SINGULARITY_GUARD: f64 = 1e-9;
/// Slope of the controller's servo PWM relation [deg/us].
pub const PITCH_PER_US: f64 = 0.09;
/// Valid servo pulse width range [us].
pub const PWM_RANGE: (f64, f64) = (1000.0, 2000.0);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MechanismError {
    #[error("four-bar cannot close at xi = {xi} rad (|C| = {c})")]
    Unassemblable { xi: f64, c: f64 },
    #[error("no pitch solution on the selected branch at xi = {xi} rad")]
    NoBranchSolution { xi: f64 },
    #[error("configuration is singular (|sin eta3| = {sin_eta3})")]
    SingularConfiguration { sin_eta3: f64 },
    #[error("singular pitch not reachable (arccos argument {arg})")]
    NotReachable { arg: f64 },
    #[error("links 3 and 4 have equal length; folded singularity is degenerate")]
    DegenerateLinks,
    #[error("pulse width {zeta} us outside [1000, 2000]")]
    OutOfRange { zeta: f64 },
    #[error("invalid mechanism parameter: {0}")]
    InvalidParams(&'static str),
    #[error("pitch map is not monotonic over the requested range")]
    NotMonotonic,
    #[error("pitch {gamma} rad is outside the servo's reach")]
    PitchOutOfReach { gamma: f64 },
    #[error("least-squares fit needs at least two distinct samples")]
    DegenerateFit,
}

/// Assembly branch of the four-bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// `eta3 in [0, pi]`; the assembled prototype.
    #[default]
    Plus,
    /// Mirrored elbow, `eta3 in [-pi, 0]`.
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismParams {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub r0: f64,
    pub x0: f64,
    pub y0: f64,
    /// Fixed joint angle of link 2 [rad].
    pub eta1: f64,
    pub n_blades: u32,
    pub branch: Branch,
}

impl MechanismParams {
    /// Parameters of the flight prototype.
    pub fn prototype() -> Self {
        Self {
            l1: 55.29,
            l2: 7.98,
            l3: 6.73,
            l4: 8.58,
            r0: 5.6,
            x0: 0.0,
            y0: 46.35,
            eta1: 256.17f64.to_radians(),
            n_blades: 2,
            branch: Branch::Plus,
        }
    }

    pub fn validate(&self) -> Result<(), MechanismError> {
        let lengths = [self.l1, self.l2, self.l3, self.l4, self.r0];
        if lengths.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(MechanismError::InvalidParams("link lengths must be positive"));
        }
        if !(self.x0.is_finite() && self.y0.is_finite() && self.eta1.is_finite()) {
            return Err(MechanismError::InvalidParams("offsets and eta1 must be finite"));
        }
        if self.n_blades == 0 {
            return Err(MechanismError::InvalidParams("n_blades must be at least 1"));
        }
        Ok(())
    }
}

impl Default for MechanismParams {
    fn default() -> Self {
        Self::prototype()
    }
}

/// A consistent configuration of the linkage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismPose {
    pub xi: f64,
    pub gamma: f64,
    pub eta3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntermediateTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
    /// `-l3 sqrt(1 - C^2)`; NaN when the loop cannot close.
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismJacobian {
    /// Passive-joint block, columns `(gamma, eta3)`.
    pub k_mat: [[f64; 2]; 2],
    /// Active-joint column.
    pub k_vec: [f64; 2],
    pub det_k: f64,
}

fn clamp_unit(c: f64) -> f64 {
    if c.abs() <= 1.0 + CLOSURE_CLAMP_TOL {
        c.clamp(-1.0, 1.0)
    } else {
        c
    }
}

pub fn intermediate_terms(params: &MechanismParams, xi: f64) -> IntermediateTerms {
    let MechanismParams { l1, l2, l3, l4, r0, x0, y0, eta1, .. } = *params;
    let a = -x0 + l2 * (FRAC_PI_2 + eta1).cos();
    let b = -y0 + r0 * xi.sin() + l1 + l2 * (FRAC_PI_2 + eta1).sin();
    let c = (a * a + b * b - l4 * l4 - l3 * l3) / (2.0 * l4 * l3);
    let p = l4 + l3 * c;
    let cc = clamp_unit(c);
    let q = -l3 * (1.0 - cc * cc).sqrt();
    IntermediateTerms { a, b, c, p, q }
}

/// Passive angle between links 3 and 4 on the configured branch.
pub fn passive_eta3(params: &MechanismParams, xi: f64) -> Result<f64, MechanismError> {
    let t = intermediate_terms(params, xi);
    if t.c.abs() > 1.0 + CLOSURE_CLAMP_TOL {
        return Err(MechanismError::Unassemblable { xi, c: t.c.abs() });
    }
    Ok(params.branch.sign() * clamp_unit(t.c).acos())
}

/// Propeller pitch for servo angle `xi`.
pub fn forward_pitch(params: &MechanismParams, xi: f64) -> Result<f64, MechanismError> {
    pose(params, xi).map(|p| p.gamma)
}

/// Full pose `(xi, gamma, eta3)` for servo angle `xi`.
pub fn pose(params: &MechanismParams, xi: f64) -> Result<MechanismPose, MechanismError> {
    let t = intermediate_terms(params, xi);
    let eta3 = passive_eta3(params, xi)?;
    // sin(eta3) carries the branch; Q on the plus branch equals t.q.
    let q = -params.l3 * eta3.sin();
    let r = (t.p * t.p + q * q).sqrt();
    let ratio = t.a / r;
    if !ratio.is_finite() || ratio.abs() > 1.0 + CLOSURE_CLAMP_TOL {
        return Err(MechanismError::NoBranchSolution { xi });
    }
    let root = ratio.clamp(-1.0, 1.0).acos();
    let gamma = q.atan2(t.p) + if t.b >= 0.0 { root } else { -root };
    Ok(MechanismPose { xi, gamma: numeric::wrap_pi(gamma), eta3 })
}

/// Residuals of the two loop-closure equations for a pose [mm].
pub fn closure_residual(params: &MechanismParams, pose: &MechanismPose) -> (f64, f64) {
    let t = intermediate_terms(params, pose.xi);
    let MechanismPose { gamma, eta3, .. } = *pose;
    let rx = params.l4 * gamma.cos() + params.l3 * (gamma + eta3).cos() - t.a;
    let ry = params.l4 * gamma.sin() + params.l3 * (gamma + eta3).sin() - t.b;
    (rx, ry)
}

pub fn jacobian(params: &MechanismParams, pose: &MechanismPose) -> MechanismJacobian {
    let MechanismParams { l3, l4, r0, .. } = *params;
    let MechanismPose { xi, gamma, eta3 } = *pose;
    let s13 = (gamma + eta3).sin();
    let c13 = (gamma + eta3).cos();
    let k_mat = [
        [-l4 * gamma.sin() - l3 * s13, -l3 * s13],
        [l4 * gamma.cos() + l3 * c13, l3 * c13],
    ];
    let k_vec = [0.0, -r0 * xi.cos()];
    let det_k = k_mat[0][0] * k_mat[1][1] - k_mat[0][1] * k_mat[1][0];
    MechanismJacobian { k_mat, k_vec, det_k }
}

fn check_singular(eta3: f64) -> Result<(), MechanismError> {
    let s = eta3.sin();
    if s.abs() <= SINGULARITY_GUARD {
        Err(MechanismError::SingularConfiguration { sin_eta3: s.abs() })
    } else {
        Ok(())
    }
}

/// `dgamma/dxi` at a consistent pose.
pub fn pitch_gain(params: &MechanismParams, pose: &MechanismPose) -> Result<f64, MechanismError> {
    check_singular(pose.eta3)?;
    let MechanismPose { xi, gamma, eta3 } = *pose;
    Ok(params.r0 * (gamma + eta3).sin() * xi.cos() / (params.l4 * eta3.sin()))
}

/// Rates of the passive joints `(gamma_dot, eta3_dot)` from `K q_dot = -k xi_dot`.
pub fn passive_rates(
    params: &MechanismParams,
    pose: &MechanismPose,
    xi_dot: f64,
) -> Result<(f64, f64), MechanismError> {
    check_singular(pose.eta3)?;
    let j = jacobian(params, pose);
    let rhs = [-j.k_vec[0] * xi_dot, -j.k_vec[1] * xi_dot];
    let k = j.k_mat;
    let gamma_dot = (rhs[0] * k[1][1] - k[0][1] * rhs[1]) / j.det_k;
    let eta3_dot = (k[0][0] * rhs[1] - k[1][0] * rhs[0]) / j.det_k;
    Ok((gamma_dot, eta3_dot))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPitch {
    /// Links 3 and 4 extended (`eta3 = 0`).
    pub extended: Result<f64, MechanismError>,
    /// Links 3 and 4 folded (`eta3 = pi`).
    pub folded: Result<f64, MechanismError>,
}

/// Pitch values at which `det K` vanishes.
pub fn singular_pitch(params: &MechanismParams) -> SingularPitch {
    let a = intermediate_terms(params, 0.0).a;
    let solve = |den: f64| {
        let arg = a / den;
        if arg.abs() > 1.0 {
            Err(MechanismError::NotReachable { arg })
        } else {
            Ok(arg.acos())
        }
    };
    let extended = solve(params.l4 + params.l3);
    let folded = if (params.l4 - params.l3).abs() < 1e-12 {
        Err(MechanismError::DegenerateLinks)
    } else {
        solve(params.l4 - params.l3)
    };
    SingularPitch { extended, folded }
}

/// Pitch at the two dwell points `xi = -pi/2` and `xi = +pi/2`.
pub fn dwell_points(params: &MechanismParams) -> [(f64, Result<f64, MechanismError>); 2] {
    [-FRAC_PI_2, FRAC_PI_2].map(|xi| (xi, forward_pitch(params, xi)))
}

/// Servo torque holding the blade against pitching moment `m_prop` [N m].
///
/// Positive torque opposes a positive moment through the linkage.
pub fn servo_torque(
    params: &MechanismParams,
    pose: &MechanismPose,
    m_prop: f64,
) -> Result<f64, MechanismError> {
    Ok(m_prop * pitch_gain(params, pose)?)
}

/// Pitch [deg] from the controller's servo PWM relation.
pub fn pwm_to_pitch(zeta: f64, zeta0: f64) -> Result<f64, MechanismError> {
    if !(PWM_RANGE.0..=PWM_RANGE.1).contains(&zeta) {
        return Err(MechanismError::OutOfRange { zeta });
    }
    Ok(PITCH_PER_US * (zeta - zeta0))
}

pub fn pitch_to_pwm(gamma_deg: f64, zeta0: f64) -> f64 {
    zeta0 + gamma_deg / PITCH_PER_US
}

/// Linear servo pulse-width to crank-angle map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoPwmMap {
    pub pwm_min: f64,
    pub pwm_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
}

impl Default for ServoPwmMap {
    fn default() -> Self {
        Self { pwm_min: 1000.0, pwm_max: 2000.0, xi_min: -FRAC_PI_2, xi_max: FRAC_PI_2 }
    }
}

impl ServoPwmMap {
    pub fn pwm_to_xi(&self, zeta: f64) -> f64 {
        self.xi_min + (zeta - self.pwm_min) * (self.xi_max - self.xi_min) / (self.pwm_max - self.pwm_min)
    }

    pub fn xi_to_pwm(&self, xi: f64) -> f64 {
        self.pwm_min + (xi - self.xi_min) * (self.pwm_max - self.pwm_min) / (self.xi_max - self.xi_min)
    }
}

/// Checks that `gamma(xi)` is strictly monotonic on `n` samples over `[lo, hi]`.
pub fn is_monotonic(
    params: &MechanismParams,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<bool, MechanismError> {
    let n = n.max(2);
    let mut prev = forward_pitch(params, lo)?;
    let mut dir = 0.0;
    for i in 1..n {
        let xi = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let g = forward_pitch(params, xi)?;
        let d = (g - prev).signum();
        if g == prev || (dir != 0.0 && d != dir) {
            return Ok(false);
        }
        dir = d;
        prev = g;
    }
    Ok(true)
}

/// Servo angle producing pitch `gamma` within `[xi_lo, xi_hi]`.
pub fn inverse_pitch(
    params: &MechanismParams,
    gamma: f64,
    xi_lo: f64,
    xi_hi: f64,
) -> Result<f64, MechanismError> {
    let f = |xi: f64| forward_pitch(params, xi).map(|g| g - gamma);
    let (flo, fhi) = (f(xi_lo)?, f(xi_hi)?);
    if flo * fhi > 0.0 {
        return Err(MechanismError::PitchOutOfReach { gamma });
    }
    let (mut lo, mut hi, mut flo) = (xi_lo, xi_hi, flo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rmse: f64,
}

/// Ordinary least-squares line through `(x, y)` samples.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LinearFit, MechanismError> {
    if points.len() < 2 {
        return Err(MechanismError::DegenerateFit);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(MechanismError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok(LinearFit { slope, intercept, rmse: (sse / n).sqrt() })
}

/// Least-squares fit of pitch [deg] against servo PWM [us] over a pitch window [deg].
pub fn fit_linear_io(
    params: &MechanismParams,
    servo: &ServoPwmMap,
    gamma_window_deg: (f64, f64),
    samples: usize,
) -> Result<LinearFit, MechanismError> {
    if !is_monotonic(params, servo.xi_min, servo.xi_max, 721)? {
        return Err(MechanismError::NotMonotonic);
    }
    let xa = inverse_pitch(params, gamma_window_deg.0.to_radians(), servo.xi_min, servo.xi_max)?;
    let xb = inverse_pitch(params, gamma_window_deg.1.to_radians(), servo.xi_min, servo.xi_max)?;
    let (za, zb) = (servo.xi_to_pwm(xa.min(xb)), servo.xi_to_pwm(xa.max(xb)));
    let n = samples.max(2);
    let mut pts = alloc::vec::Vec::with_capacity(n);
    for i in 0..n {
        let zeta = za + (zb - za) * i as f64 / (n - 1) as f64;
        let g = forward_pitch(params, servo.pwm_to_xi(zeta))?;
        pts.push((zeta, g.to_degrees()));
    }
    fit_line(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn prototype_a_matches_scalar_evaluation() {
        let p = MechanismParams::prototype();
        let t = intermediate_terms(&p, 0.0);
        // l2 cos(90 deg + 256.17 deg) = l2 cos(13.83 deg)
        let expect = 7.98 * (13.83f64).to_radians().cos();
        assert!((t.a - expect).abs() < 1e-12, "{}", t.a);
        assert!((t.a - 7.748653822724882).abs() < 1e-9);
    }

    #[test]
    fn zero_crank_makes_b_constant() {
        let p = MechanismParams { r0: 0.0, ..MechanismParams::prototype() };
        let b0 = intermediate_terms(&p, 0.0).b;
        for xi in [-1.2, -0.3, 0.7, 1.5] {
            assert!((intermediate_terms(&p, xi).b - b0).abs() < 1e-12);
        }
    }

    #[test]
    fn c_is_minus_one_for_equal_links_at_origin() {
        // A = B = 0: choose offsets that cancel the fixed link contributions.
        let mut p = MechanismParams::prototype();
        p.l3 = 5.0;
        p.l4 = 5.0;
        let a0 = p.l2 * (FRAC_PI_2 + p.eta1).cos();
        let b0 = p.l1 + p.l2 * (FRAC_PI_2 + p.eta1).sin();
        p.x0 = a0;
        p.y0 = b0;
        let t = intermediate_terms(&p, 0.0);
        assert_eq!(t.c, -1.0);
    }

    #[test]
    fn eta3_extremes() {
        assert_eq!(clamp_unit(1.0 + 1e-13).acos(), 0.0);
        assert_eq!(clamp_unit(-1.0 - 1e-13).acos(), PI);
    }

    #[test]
    fn unassemblable_reported() {
        let p = MechanismParams { y0: 0.0, ..MechanismParams::prototype() };
        assert!(matches!(passive_eta3(&p, 0.0), Err(MechanismError::Unassemblable { .. })));
        assert!(matches!(forward_pitch(&p, 0.0), Err(MechanismError::Unassemblable { .. })));
    }

    #[test]
    fn prototype_pose_at_zero() {
        let p = MechanismParams::prototype();
        let pose = pose(&p, 0.0).unwrap();
        assert!((pose.gamma.to_degrees() - 2.359).abs() < 1e-3);
        assert!((pose.eta3.to_degrees() - 94.67).abs() < 1e-2);
        let (rx, ry) = closure_residual(&p, &pose);
        assert!(rx.abs() < 1e-9 && ry.abs() < 1e-9);
    }

    #[test]
    fn minus_branch_closes_both_equations() {
        let p = MechanismParams { branch: Branch::Minus, ..MechanismParams::prototype() };
        for xi in [-1.0, -0.2, 0.0, 0.5, 1.2] {
            let pose = pose(&p, xi).unwrap();
            assert!(pose.eta3 <= 0.0);
            let (rx, ry) = closure_residual(&p, &pose);
            assert!(rx.abs() < 1e-9 && ry.abs() < 1e-9, "{rx} {ry}");
        }
    }

    #[test]
    fn dwell_gives_zero_rate() {
        let p = MechanismParams::prototype();
        let pose = pose(&p, FRAC_PI_2).unwrap();
        let (g, _) = passive_rates(&p, &pose, 1.0).unwrap();
        assert!(g.abs() < 1e-15);
        assert!(servo_torque(&p, &pose, 0.01).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rates_are_linear_in_xi_dot() {
        let p = MechanismParams::prototype();
        let pose = pose(&p, 0.3).unwrap();
        assert_eq!(passive_rates(&p, &pose, 0.0).unwrap(), (0.0, 0.0));
        let (g1, e1) = passive_rates(&p, &pose, 1.0).unwrap();
        let (g2, e2) = passive_rates(&p, &pose, 2.5).unwrap();
        assert!((g2 - 2.5 * g1).abs() < 1e-14 && (e2 - 2.5 * e1).abs() < 1e-14);
    }

    #[test]
    fn closed_form_rates_agree_with_solve() {
        let p = MechanismParams::prototype();
        for xi in [-1.0, -0.4, 0.0, 0.6, 1.1] {
            let ps = pose(&p, xi).unwrap();
            let (g, e) = passive_rates(&p, &ps, 1.0).unwrap();
            let s13 = (ps.gamma + ps.eta3).sin();
            let g_cf = p.r0 * s13 * xi.cos() / (p.l4 * ps.eta3.sin());
            let e_cf = -p.r0 * xi.cos() * (p.l3 * s13 + p.l4 * ps.gamma.sin())
                / (p.l3 * p.l4 * ps.eta3.sin());
            assert!((g - g_cf).abs() < 1e-12 * g_cf.abs().max(1.0));
            assert!((e - e_cf).abs() < 1e-12 * e_cf.abs().max(1.0));
        }
    }

    #[test]
    fn singular_configuration_rejected() {
        let p = MechanismParams::prototype();
        let ps = MechanismPose { xi: 0.0, gamma: 0.3, eta3: 0.0 };
        assert!(matches!(
            passive_rates(&p, &ps, 1.0),
            Err(MechanismError::SingularConfiguration { .. })
        ));
        assert!(servo_torque(&p, &ps, 0.01).is_err());
    }

    #[test]
    fn singular_pitch_trivial_cases() {
        let mut p = MechanismParams::prototype();
        // A = 0 when link 2 is vertical and X0 = 0.
        p.eta1 = 0.0;
        let s = singular_pitch(&p);
        assert!((s.extended.unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((s.folded.unwrap() - FRAC_PI_2).abs() < 1e-12);

        let mut p = MechanismParams::prototype();
        let a = intermediate_terms(&p, 0.0).a;
        p.l4 = a - p.l3;
        assert_eq!(singular_pitch(&p).extended.unwrap(), 0.0);

        let mut p = MechanismParams::prototype();
        p.l3 = p.l4;
        assert_eq!(singular_pitch(&p).folded, Err(MechanismError::DegenerateLinks));
    }

    #[test]
    fn prototype_singularities() {
        let p = MechanismParams::prototype();
        let s = singular_pitch(&p);
        assert!((s.extended.unwrap().to_degrees() - 59.6).abs() < 0.1);
        assert!(matches!(s.folded, Err(MechanismError::NotReachable { .. })));
    }

    #[test]
    fn pwm_relation() {
        assert_eq!(pwm_to_pitch(1500.0, 1500.0).unwrap(), 0.0);
        assert!((pwm_to_pitch(1600.0, 1500.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((pwm_to_pitch(1300.0, 1500.0).unwrap() + 18.0).abs() < 1e-12);
        assert!(matches!(pwm_to_pitch(2000.5, 1500.0), Err(MechanismError::OutOfRange { .. })));
        assert!(pwm_to_pitch(999.0, 1500.0).is_err());
    }

    #[test]
    fn fit_line_trivial() {
        let exact: alloc::vec::Vec<_> = (0..10).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        let f = fit_line(&exact).unwrap();
        assert!(f.rmse < 1e-12 && (f.slope - 3.0).abs() < 1e-12);
        let two = fit_line(&[(1.0, 2.0), (4.0, -7.0)]).unwrap();
        assert!(two.rmse < 1e-12);
        assert_eq!(fit_line(&[(1.0, 1.0)]), Err(MechanismError::DegenerateFit));
    }

    #[test]
    fn servo_map_round_trip() {
        let m = ServoPwmMap::default();
        assert!((m.pwm_to_xi(1500.0)).abs() < 1e-15);
        assert!((m.xi_to_pwm(m.pwm_to_xi(1234.5)) - 1234.5).abs() < 1e-9);
    }

    #[test]
    fn prototype_io_fit() {
        let p = MechanismParams::prototype();
        let f = fit_linear_io(&p, &ServoPwmMap::default(), (-30.0, 30.0), 401).unwrap();
        assert!(f.rmse <= 0.5, "{}", f.rmse);
        assert!(f.slope > 0.0);
    }

    #[test]
    fn validate_rejects_bad_lengths() {
        let p = MechanismParams { l3: 0.0, ..MechanismParams::prototype() };
        assert!(p.validate().is_err());
        let p = MechanismParams { n_blades: 0, ..MechanismParams::prototype() };
        assert!(p.validate().is_err());
        assert!(MechanismParams::prototype().validate().is_ok());
    }
}
