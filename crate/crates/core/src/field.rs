//! Magnetic field of a straight current-carrying wire plus an optional
//! homogeneous bias field.
//!
//! The wire is treated as an infinite straight line; outside the conductor
//! the field magnitude is μ₀I/(2πr) and circulates around the wire with the
//! right-hand rule, inside it grows linearly with radius (uniform current
//! density). Superposing a perpendicular bias field B_b cancels the wire
//! field exactly along a line parallel to the wire at r_s = (μ₀/2π)(I/B_b).

use nalgebra::{Matrix3, Vector3};

use crate::constants::MU0_OVER_2PI;
use crate::error::ModelError;

const UNIT_NORM_TOL: f64 = 1.0e-12;
const PERPENDICULARITY_TOL: f64 = 1.0e-9;

/// Straight wire carrying a signed current along `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct WireSpec {
    /// Current (A), signed; positive flows along `axis`.
    pub current: f64,
    /// Conductor radius (m).
    pub radius: f64,
    /// Unit vector along the wire.
    pub axis: Vector3<f64>,
    /// A point on the wire axis (m).
    pub axis_point: Vector3<f64>,
    /// Physical wire length (m); the field treats the wire as infinite, the
    /// length only bounds the illuminated/rendered region.
    pub length: f64,
}

impl Default for WireSpec {
    fn default() -> Self {
        Self {
            current: 1.0,
            radius: 25.0e-6,
            axis: Vector3::x(),
            axis_point: Vector3::zeros(),
            length: 0.10,
        }
    }
}

impl WireSpec {
    pub fn with_current(current: f64) -> Self {
        Self {
            current,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(ModelError::Invalid {
                what: "wire radius",
                details: format!("{} m", self.radius),
            });
        }
        if !self.current.is_finite() {
            return Err(ModelError::Invalid {
                what: "wire current",
                details: format!("{} A", self.current),
            });
        }
        if (self.axis.norm() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(ModelError::Invalid {
                what: "wire axis",
                details: format!("norm {} is not 1", self.axis.norm()),
            });
        }
        if !(self.axis_point.iter().all(|c| c.is_finite()) && self.length > 0.0) {
            return Err(ModelError::Invalid {
                what: "wire geometry",
                details: "axis point must be finite and length positive".into(),
            });
        }
        Ok(())
    }

    /// Perpendicular distance of `p` from the wire axis.
    pub fn perpendicular_distance(&self, p: &Vector3<f64>) -> f64 {
        let d = p - self.axis_point;
        (d - self.axis * d.dot(&self.axis)).norm()
    }
}

/// Homogeneous bias field perpendicular to the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasFieldSpec {
    /// Magnitude (T), ≥ 0.
    pub magnitude: f64,
    /// Unit direction; must be perpendicular to the wire axis.
    pub direction: Vector3<f64>,
}

impl BiasFieldSpec {
    pub fn new(magnitude: f64, direction: Vector3<f64>) -> Self {
        Self {
            magnitude,
            direction,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.magnitude >= 0.0 && self.magnitude.is_finite()) {
            return Err(ModelError::Invalid {
                what: "bias magnitude",
                details: format!("{} T", self.magnitude),
            });
        }
        if (self.direction.norm() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(ModelError::Invalid {
                what: "bias direction",
                details: format!("norm {} is not 1", self.direction.norm()),
            });
        }
        Ok(())
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.direction * self.magnitude
    }
}

/// Complete field environment an atom moves in.
///
/// `bias: None` (or zero magnitude) is the Kepler configuration; a nonzero
/// perpendicular bias produces the side guide.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub wire: WireSpec,
    pub bias: Option<BiasFieldSpec>,
    /// Unit vector gravity points along (default −ẑ).
    pub gravity_direction: Vector3<f64>,
    pub gravity_on: bool,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            wire: WireSpec::default(),
            bias: None,
            gravity_direction: -Vector3::z(),
            gravity_on: true,
        }
    }
}

impl FieldConfig {
    /// Wire-only configuration (Kepler guide), gravity off.
    pub fn kepler(wire: WireSpec) -> Self {
        Self {
            wire,
            bias: None,
            gravity_on: false,
            ..Self::default()
        }
    }

    /// Wire + perpendicular bias (side guide), gravity off.
    pub fn side_guide(wire: WireSpec, bias: BiasFieldSpec) -> Result<Self, ModelError> {
        let cfg = Self {
            wire,
            bias: Some(bias),
            gravity_on: false,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gravity(mut self) -> Self {
        self.gravity_on = true;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.wire.validate()?;
        if let Some(bias) = &self.bias {
            bias.validate()?;
            let dot = bias.direction.dot(&self.wire.axis).abs();
            if dot > PERPENDICULARITY_TOL {
                return Err(ModelError::Invalid {
                    what: "bias direction",
                    details: format!("not perpendicular to the wire (|cos| = {dot:.3e})"),
                });
            }
        }
        if (self.gravity_direction.norm() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(ModelError::Invalid {
                what: "gravity direction",
                details: format!("norm {} is not 1", self.gravity_direction.norm()),
            });
        }
        Ok(())
    }

    /// Bias vector, zero when no bias is configured.
    pub fn bias_vector(&self) -> Vector3<f64> {
        self.bias.as_ref().map_or(Vector3::zeros(), |b| b.vector())
    }
}

/// Field vector together with its spatial Jacobian ∂B_i/∂x_j.
///
/// The Jacobian drives both the analytic force (∇|B| = Jᵀ·B̂) and the
/// adiabaticity monitor (dB/dt = J·v); evaluating them from one sample keeps
/// the integrator at a single field evaluation per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub b: Vector3<f64>,
    pub jacobian: Matrix3<f64>,
}

impl FieldSample {
    pub fn zero() -> Self {
        Self {
            b: Vector3::zeros(),
            jacobian: Matrix3::zeros(),
        }
    }

    /// Gradient of |B|; zero exactly at a field zero (the magnitude cone has
    /// no gradient there and the integrator treats it as a stationary point).
    pub fn grad_norm(&self) -> Vector3<f64> {
        let norm = self.b.norm();
        if norm == 0.0 {
            return Vector3::zeros();
        }
        self.jacobian.transpose() * (self.b / norm)
    }
}

/// Field of the wire alone at `p`.
pub fn wire_field(p: &Vector3<f64>, wire: &WireSpec) -> Vector3<f64> {
    wire_field_sample(p, wire).b
}

/// Field and Jacobian of the wire alone.
///
/// Outside the conductor B = (μ₀I/2π)·(â×d⊥)/r², inside
/// B = (μ₀I/2π)·(â×d⊥)/a² (uniform current density); the two branches agree
/// at r = a.
pub fn wire_field_sample(p: &Vector3<f64>, wire: &WireSpec) -> FieldSample {
    let c = MU0_OVER_2PI * wire.current;
    if c == 0.0 {
        return FieldSample::zero();
    }
    let d = p - wire.axis_point;
    let d_perp = d - wire.axis * d.dot(&wire.axis);
    let r2 = d_perp.norm_squared();
    let w = wire.axis.cross(&d_perp);
    let a2 = wire.radius * wire.radius;
    if r2 >= a2 {
        // B = c·w/r²; J = c([â]ₓ/r² − 2·w·d⊥ᵀ/r⁴)
        let inv_r2 = 1.0 / r2;
        FieldSample {
            b: w * (c * inv_r2),
            jacobian: (wire.axis.cross_matrix() - (w * d_perp.transpose()) * (2.0 * inv_r2))
                * (c * inv_r2),
        }
    } else {
        let inv_a2 = 1.0 / a2;
        FieldSample {
            b: w * (c * inv_a2),
            jacobian: wire.axis.cross_matrix() * (c * inv_a2),
        }
    }
}

/// Total field: wire field plus bias.
pub fn total_field(p: &Vector3<f64>, cfg: &FieldConfig) -> Vector3<f64> {
    wire_field(p, &cfg.wire) + cfg.bias_vector()
}

/// Total field and Jacobian (the homogeneous bias adds nothing to the
/// Jacobian).
pub fn total_field_sample(p: &Vector3<f64>, cfg: &FieldConfig) -> FieldSample {
    let mut sample = wire_field_sample(p, &cfg.wire);
    sample.b += cfg.bias_vector();
    sample
}
