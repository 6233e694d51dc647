use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use heliquad_core::allocation::{
    allocate, fault_matrix, limit, opposite, ActuatorCommand, ActuatorLimits, MixerGeometry,
};
use heliquad_core::controller::{rate_pid, ControllerGains, RateLoopState};
use heliquad_core::dynamics::mixer_matrix;
use heliquad_core::harness::{build_default_models, hover_mission, run_mission, LogRecord, SimConfig, SimModels};
use heliquad_core::mechanism::{closure_residual, pitch_gain, pose, MechanismParams};
use heliquad_core::nn::TrainConfig;
use heliquad_core::propeller::DatasetSweep;
use nalgebra::{Vector3, Vector4};
use proptest::prelude::*;

fn geom() -> MixerGeometry {
    MixerGeometry { arm: 0.275, spin: [-1.0, 1.0, -1.0, 1.0] }
}

/// Small, quickly trained models; quality is irrelevant for these properties.
fn models() -> &'static SimModels {
    static M: OnceLock<SimModels> = OnceLock::new();
    M.get_or_init(|| {
        let train = TrainConfig { epochs: 3000, ..TrainConfig::default() };
        build_default_models(&DatasetSweep::default(), &train).unwrap().0
    })
}

fn command() -> impl Strategy<Value = ActuatorCommand> {
    (prop::array::uniform4(-2000.0..20000.0f64), prop::array::uniform4(-1.0..1.0f64), prop::array::uniform4(any::<bool>()))
        .prop_map(|(omega, gamma, enabled)| ActuatorCommand { omega, gamma, enabled })
}

fn inside(l: &ActuatorLimits) -> impl Strategy<Value = ActuatorCommand> {
    (prop::array::uniform4(l.omega_min..l.omega_max), prop::array::uniform4(l.gamma_min..l.gamma_max))
        .prop_map(|(omega, gamma)| ActuatorCommand { omega, gamma, enabled: [true; 4] })
}

proptest! {
    #[test]
    fn limiter_respects_box_and_rate(prev in inside(&ActuatorLimits::default()), raw in command(), dt in 1e-4..0.05f64) {
        let l = ActuatorLimits::default();
        let out = limit(&l, &prev, &raw, dt);
        for i in 0..4 {
            prop_assert!(out.gamma[i] >= l.gamma_min && out.gamma[i] <= l.gamma_max);
            prop_assert!((out.gamma[i] - prev.gamma[i]).abs() <= l.gamma_rate * dt * (1.0 + 1e-12));
            if raw.enabled[i] {
                prop_assert!(out.omega[i] >= l.omega_min && out.omega[i] <= l.omega_max);
                prop_assert!((out.omega[i] - prev.omega[i]).abs() <= l.omega_rate * dt * (1.0 + 1e-12));
            } else {
                prop_assert_eq!(out.omega[i], 0.0);
            }
        }
    }

    #[test]
    fn fault_pattern_for_every_actuator(mu in 1u8..=4, k in 1e-3..0.1f64) {
        let f = fault_matrix(mu, k).unwrap().f;
        let c = mu as usize - 1;
        let o = opposite(mu as usize) - 1;
        for r in 0..4 {
            for col in 0..4 {
                let expect = match (r, col) {
                    (2, x) if x == c => 1.0 / k,
                    (0 | 1 | 3, x) if x == c => 0.0,
                    (2 | 3, x) if x == o => 0.0,
                    _ => 1.0,
                };
                prop_assert_eq!(f[(r, col)], expect);
            }
        }
    }

    #[test]
    fn healthy_allocation_multiplies_back(
        m in prop::array::uniform3(-1.0..1.0f64),
        t in -15.0..15.0f64,
        k in prop::array::uniform4(0.005..0.05f64),
    ) {
        let f = fault_matrix(0, 0.0).unwrap();
        let gammas = [0.1, 0.2, 0.3, 0.4];
        let kt = |g: f64| Ok::<_, heliquad_core::propeller::PropellerError>(k[(g * 10.0).round() as usize - 1]);
        let a = allocate(&geom(), &Vector3::from(m), t, &f, gammas, kt).unwrap();
        let yaw = [0, 1, 2, 3].map(|i| geom().spin[i] * k[i]);
        let back = mixer_matrix(0.275, yaw) * a.y;
        prop_assert!((back - Vector4::new(m[0], m[1], m[2], t)).amax() < 1e-12);
    }

    #[test]
    fn three_actuator_structure(
        m in prop::array::uniform3(-1.0..1.0f64),
        t in 0.5..15.0f64,
        k1 in 0.005..0.05f64,
        k3 in 0.005..0.05f64,
        k4 in 0.005..0.05f64,
    ) {
        let f = fault_matrix(4, k4).unwrap();
        let gammas = [0.1, -0.03, 0.3, 0.4];
        let kt = |g: f64| Ok::<_, heliquad_core::propeller::PropellerError>(if g == 0.1 { k1 } else if g == 0.3 { k3 } else { k4 });
        let a = allocate(&geom(), &Vector3::from(m), t, &f, gammas, kt).unwrap();
        let d = 0.275;
        prop_assert!((a.y[1] + m[0] / d).abs() < 1e-12);
        prop_assert!((a.y[0] + a.y[2] - t).abs() < 1e-12);
        prop_assert!((a.y[0] - a.y[2] - m[1] / d).abs() < 1e-12);
        prop_assert!((-k1 * a.y[0] - k3 * a.y[2] + a.y[3] - m[2]).abs() < 1e-12);
    }

    #[test]
    fn integral_never_exceeds_windup(
        errors in prop::collection::vec(prop::array::uniform3(-50.0..50.0f64), 1..200),
        windup in 0.01..2.0f64,
    ) {
        let gains = ControllerGains::simulation();
        let mut state = RateLoopState::new(windup);
        for e in errors {
            rate_pid(&Vector3::from(e), &Vector3::zeros(), &gains, 1e-3, &mut state);
            prop_assert!(state.integral.amax() <= windup);
        }
    }

    #[test]
    fn closure_holds_over_servo_range(xi in -FRAC_PI_2..FRAC_PI_2) {
        let p = MechanismParams::prototype();
        let pz = pose(&p, xi).unwrap();
        let (rx, ry) = closure_residual(&p, &pz);
        prop_assert!(rx.abs() < 1e-9 && ry.abs() < 1e-9);
        prop_assert!(pz.eta3 >= 0.0 && pz.eta3 <= PI);
    }

    #[test]
    fn pitch_gain_matches_finite_difference(xi in -1.4..1.4f64) {
        let p = MechanismParams::prototype();
        let h = 1e-6;
        let fd = (pose(&p, xi + h).unwrap().gamma - pose(&p, xi - h).unwrap().gamma) / (2.0 * h);
        let g = pitch_gain(&p, &pose(&p, xi).unwrap()).unwrap();
        prop_assert!((g - fd).abs() < 1e-6, "{} vs {}", g, fd);
    }

    #[test]
    fn log_row_round_trip(vals in prop::collection::vec(-1e6..1e6f64, LogRecord::WIDTH - 2), sigma in any::<bool>(), mu in 0u8..=4) {
        let mut row = vals.clone();
        row.push(if sigma { 1.0 } else { 0.0 });
        row.push(mu as f64);
        let rec = LogRecord::from_row(&row).unwrap();
        prop_assert_eq!(rec.to_row().to_vec(), row);
    }

    #[test]
    fn nn_outputs_finite_and_repeatable(t in -1e3..1e3f64, g in -10.0..10.0f64) {
        let m = &models().nn2;
        let a = m.predict(&[t, g]);
        let b = m.predict(&[t, g]);
        prop_assert!(a.outputs.iter().all(|v| v.is_finite()));
        prop_assert_eq!(a.outputs, b.outputs);
    }
}

#[test]
fn missions_are_bit_identical() {
    let models = models();
    let cfg = SimConfig::for_models(models).unwrap();
    let script = hover_mission(0.5);
    let a = run_mission(&cfg, models, &script).unwrap();
    let b = run_mission(&cfg, models, &script).unwrap();
    assert!(!a.records.is_empty());
    let bits = |l: &[LogRecord]| l.iter().flat_map(|r| r.to_row()).map(f64::to_bits).collect::<Vec<_>>();
    assert_eq!(bits(&a.records), bits(&b.records));
}

#[test]
fn training_is_seed_deterministic() {
    let train = TrainConfig { epochs: 200, ..TrainConfig::default() };
    let a = build_default_models(&DatasetSweep::default(), &train).unwrap().0;
    let b = build_default_models(&DatasetSweep::default(), &train).unwrap().0;
    assert_eq!(a, b);
}
