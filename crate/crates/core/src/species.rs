//! Atomic species parameters.

use crate::constants::{BOHR_MAGNETON, LITHIUM7_MASS};
use crate::error::ModelError;

/// Spin-seeker character of the Zeeman state the atom is prepared in.
///
/// High-field seekers (μ·B > 0) are attracted to field maxima and orbit the
/// wire; low-field seekers (μ·B < 0) are attracted to field minima and are
/// confined on the zero-field line of the side guide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Seeker {
    HighField,
    LowField,
}

impl Seeker {
    /// Sign of the adiabatic potential V = s·μ_eff·|B|.
    pub fn potential_sign(self) -> f64 {
        match self {
            Seeker::HighField => -1.0,
            Seeker::LowField => 1.0,
        }
    }
}

/// Species parameters entering the adiabatic scalar model.
///
/// The vector coupling collapses into a single effective moment magnitude
/// `mu_eff`; the Zeeman sublevel structure is not resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpecies {
    /// Atomic mass (kg).
    pub mass: f64,
    /// Effective magnetic moment magnitude (J/T).
    pub mu_eff: f64,
    pub seeker: Seeker,
}

impl AtomSpecies {
    /// Lithium-7 with an effective moment of one Bohr magneton.
    pub fn lithium7(seeker: Seeker) -> Self {
        Self {
            mass: LITHIUM7_MASS,
            mu_eff: BOHR_MAGNETON,
            seeker,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(ModelError::Invalid {
                what: "atom mass",
                details: format!("{} kg", self.mass),
            });
        }
        if !(self.mu_eff >= 0.0 && self.mu_eff.is_finite()) {
            return Err(ModelError::Invalid {
                what: "effective magnetic moment",
                details: format!("{} J/T", self.mu_eff),
            });
        }
        Ok(())
    }
}
