//! Unit conversions for configuration boundaries and reports.
//!
//! The library works in SI throughout; gauss, micrometers and friends only
//! appear in configs and human-readable output.

use crate::constants::BOLTZMANN;

/// One gauss in tesla.
pub const GAUSS: f64 = 1.0e-4;

pub fn gauss_to_tesla(gauss: f64) -> f64 {
    gauss * GAUSS
}

pub fn tesla_to_gauss(tesla: f64) -> f64 {
    tesla / GAUSS
}

/// Field gradients: 1 T/m = 100 G/cm.
pub fn tesla_per_meter_to_gauss_per_cm(grad: f64) -> f64 {
    grad * 100.0
}

/// Energy expressed as a temperature in microkelvin (E / k_B).
pub fn joule_to_microkelvin(energy: f64) -> f64 {
    energy / BOLTZMANN * 1.0e6
}

pub fn microkelvin_to_joule(micro_kelvin: f64) -> f64 {
    micro_kelvin * 1.0e-6 * BOLTZMANN
}
