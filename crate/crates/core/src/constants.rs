//! Physical constants in SI units (CODATA 2018 where applicable).

use std::f64::consts::PI;

/// Vacuum permeability μ₀ (T·m/A), the pre-2019 defined value 4π×10⁻⁷.
pub const MU0: f64 = 4.0e-7 * PI;

/// μ₀/(2π) (T·m/A). The field of a straight wire is `MU0_OVER_2PI * I / r`;
/// all field formulas use this constant so the prefactor is exactly 2×10⁻⁷.
pub const MU0_OVER_2PI: f64 = 2.0e-7;

/// Bohr magneton μ_B (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Reduced Planck constant ħ (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B (J/K), exact since the 2019 SI redefinition.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Standard gravitational acceleration g (m/s²).
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// Mass of a lithium-7 atom (kg).
pub const LITHIUM7_MASS: f64 = 1.165e-26;

/// The constants bundle used by the model. All values strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Vacuum permeability (T·m/A).
    pub mu0: f64,
    /// Bohr magneton (J/T).
    pub mu_b: f64,
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            mu0: MU0,
            mu_b: BOHR_MAGNETON,
            hbar: HBAR,
            k_b: BOLTZMANN,
            g: STANDARD_GRAVITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_strictly_positive() {
        let c = PhysicalConstants::default();
        for v in [c.mu0, c.mu_b, c.hbar, c.k_b, c.g] {
            assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn wire_prefactor_is_exact() {
        assert_eq!(MU0_OVER_2PI, 2.0e-7);
        // μ0/(2π) agrees with the prefactor to double precision.
        let ratio = MU0 / (2.0 * PI);
        assert!((ratio - MU0_OVER_2PI).abs() <= 2.0 * f64::EPSILON * MU0_OVER_2PI);
    }

    #[test]
    fn lithium7_mass_close_to_7u() {
        // 7.016 u × 1.66054e-27 kg/u = 1.16504e-26 kg
        assert!((LITHIUM7_MASS - 1.165e-26).abs() < 1e-29);
    }
}
