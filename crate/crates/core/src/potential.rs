//! Adiabatic scalar potential and the force derived from it.
//!
//! With the Larmor precession much faster than the rotation of the field
//! direction seen by the atom, the spin projection is conserved and the atom
//! moves in V = s·μ_eff·|B| (s = −1 for high-field seekers, +1 for low-field
//! seekers), plus gravity. For a high-field seeker near a bare wire this is
//! an attractive 1/r potential.

use nalgebra::Vector3;

use crate::constants::STANDARD_GRAVITY;
use crate::field::{total_field_sample, FieldConfig, FieldSample};
use crate::species::AtomSpecies;

/// Potential energy (J) of the atom at `p`.
///
/// The gravity term is m·g·h with h the height along −gravity_direction,
/// referenced to the coordinate origin.
pub fn potential(p: &Vector3<f64>, atom: &AtomSpecies, cfg: &FieldConfig) -> f64 {
    potential_from_field_norm(total_field_sample(p, cfg).b.norm(), p, atom, cfg)
}

pub(crate) fn potential_from_field_norm(
    b_norm: f64,
    p: &Vector3<f64>,
    atom: &AtomSpecies,
    cfg: &FieldConfig,
) -> f64 {
    let mut v = atom.seeker.potential_sign() * atom.mu_eff * b_norm;
    if cfg.gravity_on {
        v -= atom.mass * STANDARD_GRAVITY * p.dot(&cfg.gravity_direction);
    }
    v
}

/// Force −∇V (N), evaluated from the analytic field Jacobian.
///
/// |B| is cone-like at a field zero; exactly there the magnetic term is
/// defined as zero (the integrator never lands on the measure-zero set in
/// double precision).
pub fn force(p: &Vector3<f64>, atom: &AtomSpecies, cfg: &FieldConfig) -> Vector3<f64> {
    force_from_sample(&total_field_sample(p, cfg), atom, cfg)
}

pub(crate) fn force_from_sample(
    sample: &FieldSample,
    atom: &AtomSpecies,
    cfg: &FieldConfig,
) -> Vector3<f64> {
    let mut f = sample.grad_norm() * (-atom.seeker.potential_sign() * atom.mu_eff);
    if cfg.gravity_on {
        f += cfg.gravity_direction * (atom.mass * STANDARD_GRAVITY);
    }
    f
}
