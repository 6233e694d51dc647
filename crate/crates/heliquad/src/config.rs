//! TOML parameter files. Every key is optional and defaults to the prototype.

use std::path::Path;

use heliquad_core::controller::ControllerGains;
use heliquad_core::dynamics::VehicleParams;
use heliquad_core::mechanism::{Branch, MechanismParams, ServoPwmMap};
use heliquad_core::propeller::BladeGeometry;
use nalgebra::{Matrix3, Vector3};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::FormatError;

/// Reads a TOML file, or returns the defaults when no path is given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, FormatError> {
    match path {
        Some(p) => Ok(toml::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(T::default()),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    pub mass: f64,
    /// Principal moments of inertia [kg m^2].
    pub inertia: [f64; 3],
    pub arm: f64,
    pub gravity: f64,
    pub spin: [f64; 4],
    pub zeta0: [f64; 4],
    pub motor_tau: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        let p = VehicleParams::prototype();
        Self {
            mass: p.mass,
            inertia: [p.inertia[(0, 0)], p.inertia[(1, 1)], p.inertia[(2, 2)]],
            arm: p.arm,
            gravity: p.gravity,
            spin: p.spin,
            zeta0: p.zeta0,
            motor_tau: p.motor_tau,
        }
    }
}

impl VehicleConfig {
    pub fn params(&self) -> Result<VehicleParams, FormatError> {
        let p = VehicleParams {
            mass: self.mass,
            inertia: Matrix3::from_diagonal(&Vector3::from(self.inertia)),
            arm: self.arm,
            gravity: self.gravity,
            spin: self.spin,
            zeta0: self.zeta0,
            motor_tau: self.motor_tau,
        };
        p.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchName {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismConfig {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub r0: f64,
    #[serde(rename = "X0", alias = "x0")]
    pub x0: f64,
    #[serde(rename = "Y0", alias = "y0")]
    pub y0: f64,
    pub eta1_deg: f64,
    pub n_blades: u32,
    pub branch: BranchName,
    /// Servo crank angle at 1000 us and 2000 us.
    pub xi_min_deg: f64,
    pub xi_max_deg: f64,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        let p = MechanismParams::prototype();
        let s = ServoPwmMap::default();
        Self {
            l1: p.l1,
            l2: p.l2,
            l3: p.l3,
            l4: p.l4,
            r0: p.r0,
            x0: p.x0,
            y0: p.y0,
            eta1_deg: p.eta1.to_degrees(),
            n_blades: p.n_blades,
            branch: BranchName::Plus,
            xi_min_deg: s.xi_min.to_degrees(),
            xi_max_deg: s.xi_max.to_degrees(),
        }
    }
}

impl MechanismConfig {
    pub fn params(&self) -> Result<MechanismParams, FormatError> {
        let p = MechanismParams {
            l1: self.l1,
            l2: self.l2,
            l3: self.l3,
            l4: self.l4,
            r0: self.r0,
            x0: self.x0,
            y0: self.y0,
            eta1: self.eta1_deg.to_radians(),
            n_blades: self.n_blades,
            branch: match self.branch {
                BranchName::Plus => Branch::Plus,
                BranchName::Minus => Branch::Minus,
            },
        };
        p.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(p)
    }

    pub fn servo(&self) -> Result<ServoPwmMap, FormatError> {
        if !(self.xi_min_deg < self.xi_max_deg) {
            return Err(FormatError::Invalid("xi_min_deg must be below xi_max_deg".into()));
        }
        Ok(ServoPwmMap { xi_min: self.xi_min_deg.to_radians(), xi_max: self.xi_max_deg.to_radians(), ..ServoPwmMap::default() })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub chord_r: Vec<f64>,
    pub chord_c: Vec<f64>,
    pub n_blades: u32,
    pub n_elements: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = BladeGeometry::prototype();
        Self { r_min: g.r_min, r_max: g.r_max, chord_r: g.chord_r, chord_c: g.chord_c, n_blades: g.n_blades, n_elements: g.n_elements }
    }
}

impl GeometryConfig {
    pub fn geometry(&self) -> Result<BladeGeometry, FormatError> {
        let g = BladeGeometry {
            r_min: self.r_min,
            r_max: self.r_max,
            chord_r: self.chord_r.clone(),
            chord_c: self.chord_c.clone(),
            n_blades: self.n_blades,
            n_elements: self.n_elements,
        };
        g.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(g)
    }
}

/// Per-axis gains as `[roll, pitch, yaw]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainsConfig {
    pub ka: [f64; 3],
    pub kp: [f64; 3],
    pub ki: [f64; 3],
    pub kd: [f64; 3],
}

impl Default for GainsConfig {
    fn default() -> Self {
        let g = ControllerGains::simulation();
        Self { ka: g.ka.into(), kp: g.kp.into(), ki: g.ki.into(), kd: g.kd.into() }
    }
}

impl GainsConfig {
    pub fn gains(&self) -> Result<ControllerGains, FormatError> {
        let g = ControllerGains {
            ka: Vector3::from(self.ka),
            kp: Vector3::from(self.kp),
            ki: Vector3::from(self.ki),
            kd: Vector3::from(self.kd),
        };
        g.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(g)
    }
}
