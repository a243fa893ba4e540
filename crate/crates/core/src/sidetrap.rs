//! Closed-form characterization of the side guide.
//!
//! The bias field cancels the wire field along a line parallel to the wire
//! at r_s = (μ₀/2π)(I/B_b). Around that line the field grows linearly in all
//! transverse directions with gradient B_b/r_s = 2π·B_b²/(μ₀·I), forming a
//! guide tube for low-field seekers with depth μ_eff·B_b. Decreasing the
//! current therefore makes the trap smaller and steeper at fixed depth.

use nalgebra::Vector3;

use crate::constants::MU0_OVER_2PI;
use crate::error::ModelError;
use crate::field::{BiasFieldSpec, WireSpec};
use crate::species::{AtomSpecies, Seeker};

/// Location of the zero-field line of the side guide.
#[derive(Debug, Clone, PartialEq)]
pub struct SideTrapCenter {
    /// Distance of the zero line from the wire axis (m).
    pub distance: f64,
    /// Transverse unit vector from the wire axis toward the zero line.
    pub direction: Vector3<f64>,
    /// A point on the zero line (m).
    pub line_point: Vector3<f64>,
}

/// Distance and direction of the field-zero line, r_s = (μ₀/2π)·(I/B_b).
pub fn side_trap_center(
    wire: &WireSpec,
    bias: &BiasFieldSpec,
) -> Result<SideTrapCenter, ModelError> {
    if bias.magnitude <= 0.0 || wire.current == 0.0 {
        return Err(ModelError::NoSideTrap);
    }
    let r_s = MU0_OVER_2PI * wire.current.abs() / bias.magnitude;
    if r_s <= wire.radius {
        return Err(ModelError::TrapInsideWire {
            r_s,
            radius: wire.radius,
        });
    }
    // The wire field is c·(â×r̂)/r; it opposes the bias along â×b̂ for
    // positive current (and the mirror side for negative current).
    let direction = (wire.axis.cross(&bias.direction) * wire.current.signum()).normalize();
    Ok(SideTrapCenter {
        distance: r_s,
        direction,
        line_point: wire.axis_point + direction * r_s,
    })
}

/// Linearized transverse field gradient at the zero line (T/m),
/// B_b/r_s = 2π·B_b²/(μ₀·I).
pub fn side_trap_gradient(wire: &WireSpec, bias: &BiasFieldSpec) -> Result<f64, ModelError> {
    let center = side_trap_center(wire, bias)?;
    Ok(bias.magnitude / center.distance)
}

/// Trap depth for a low-field seeker (J): the field magnitude rises from
/// zero at the line to B_b along the escape direction away from the wire.
pub fn side_trap_depth(atom: &AtomSpecies, bias: &BiasFieldSpec) -> Result<f64, ModelError> {
    if atom.seeker != Seeker::LowField {
        return Err(ModelError::HighFieldSeekerSideTrap);
    }
    Ok(atom.mu_eff * bias.magnitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::BOLTZMANN;
    use crate::units::{gauss_to_tesla, tesla_per_meter_to_gauss_per_cm};
    use approx::assert_relative_eq;

    fn bias_10g() -> BiasFieldSpec {
        BiasFieldSpec::new(gauss_to_tesla(10.0), Vector3::z())
    }

    #[test]
    fn design_point_position() {
        // 0.5 A and 10 G put the trap 100 μm from the wire center.
        let trap = side_trap_center(&WireSpec::with_current(0.5), &bias_10g()).unwrap();
        assert_relative_eq!(trap.distance, 100.0e-6, max_relative = 1e-12);
        // Positive current along x̂ with bias +ẑ places the line at −ŷ.
        assert_relative_eq!(trap.direction.y, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn position_linear_in_current() {
        let trap = side_trap_center(&WireSpec::with_current(1.0), &bias_10g()).unwrap();
        assert_relative_eq!(trap.distance, 200.0e-6, max_relative = 1e-12);
        // Exact scaling: doubling I doubles r_s.
        let half = side_trap_center(&WireSpec::with_current(0.5), &bias_10g()).unwrap();
        assert_eq!(trap.distance, 2.0 * half.distance);
    }

    #[test]
    fn trap_moves_inside_wire_at_low_current() {
        // r_s(1 mA, 10 G) = 0.2 μm < 25 μm conductor radius.
        let err = side_trap_center(&WireSpec::with_current(1.0e-3), &bias_10g()).unwrap_err();
        assert!(matches!(err, ModelError::TrapInsideWire { .. }));
    }

    #[test]
    fn no_trap_without_bias_or_current() {
        let none = BiasFieldSpec::new(0.0, Vector3::z());
        assert!(matches!(
            side_trap_center(&WireSpec::with_current(0.5), &none),
            Err(ModelError::NoSideTrap)
        ));
        assert!(matches!(
            side_trap_center(&WireSpec::with_current(0.0), &bias_10g()),
            Err(ModelError::NoSideTrap)
        ));
    }

    #[test]
    fn design_point_gradient() {
        // 0.5 A, 10 G: 10 T/m = 1000 G/cm.
        let g = side_trap_gradient(&WireSpec::with_current(0.5), &bias_10g()).unwrap();
        assert_relative_eq!(g, 10.0, max_relative = 1e-12);
        assert_relative_eq!(tesla_per_meter_to_gauss_per_cm(g), 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn gradient_scalings() {
        let one_amp = side_trap_gradient(&WireSpec::with_current(1.0), &bias_10g()).unwrap();
        assert_relative_eq!(tesla_per_meter_to_gauss_per_cm(one_amp), 500.0, max_relative = 1e-12);
        // Exact scaling: doubling B_b quadruples the gradient.
        let double_bias = BiasFieldSpec::new(gauss_to_tesla(20.0), Vector3::z());
        let g2 = side_trap_gradient(&WireSpec::with_current(1.0), &double_bias).unwrap();
        assert_eq!(g2, 4.0 * one_amp);
    }

    #[test]
    fn depth_is_bias_magnitude_times_moment() {
        let atom = AtomSpecies::lithium7(Seeker::LowField);
        let depth = side_trap_depth(&atom, &bias_10g()).unwrap();
        // μ_B · 10 G = 9.274×10⁻²⁷ J ≈ k_B · 672 μK.
        assert_relative_eq!(depth, 9.2740100783e-27, max_relative = 1e-10);
        assert_relative_eq!(depth / BOLTZMANN * 1e6, 671.7, max_relative = 1e-3);
        // Independent of the current, zero at zero bias.
        assert_eq!(
            side_trap_depth(&atom, &BiasFieldSpec::new(0.0, Vector3::z())).unwrap(),
            0.0
        );
    }

    #[test]
    fn no_depth_for_high_field_seekers() {
        let atom = AtomSpecies::lithium7(Seeker::HighField);
        assert!(matches!(
            side_trap_depth(&atom, &bias_10g()),
            Err(ModelError::HighFieldSeekerSideTrap)
        ));
    }
}
