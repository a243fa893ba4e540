//! Trajectory integration in the guide potential.
//!
//! A fixed-step velocity-Verlet integrator (second order, symplectic)
//! advances single atoms; each step checks for wire collision, domain exit
//! and loss of adiabaticity. The adiabaticity monitor compares the Larmor
//! frequency ω_L = μ_eff|B|/ħ with the rotation rate ω_B of the field
//! direction along the trajectory; ε = ω_B/ω_L above the configured
//! threshold latches a spin-flip flag without removing the atom, so analysis
//! can count flagged atoms as lost or kept.

use nalgebra::Vector3;

use crate::constants::{HBAR, MU0_OVER_2PI};
use crate::error::DynamicsError;
use crate::field::{total_field_sample, FieldConfig, FieldSample, WireSpec};
use crate::potential::{force_from_sample, potential};
use crate::species::{AtomSpecies, Seeker};

/// Instantaneous state of one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomState {
    pub species: AtomSpecies,
    /// Position (m).
    pub position: Vector3<f64>,
    /// Velocity (m/s).
    pub velocity: Vector3<f64>,
    /// Time (s).
    pub time: f64,
}

impl AtomState {
    pub fn new(species: AtomSpecies, position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self {
            species,
            position,
            velocity,
            time: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|c| c.is_finite()) && self.velocity.iter().all(|c| c.is_finite())
    }

    /// Total mechanical energy ½m|v|² + V (J).
    pub fn energy(&self, cfg: &FieldConfig) -> f64 {
        0.5 * self.species.mass * self.velocity.norm_squared()
            + potential(&self.position, &self.species, cfg)
    }

    /// Angular momentum about the wire axis (kg·m²/s).
    pub fn axial_angular_momentum(&self, wire: &WireSpec) -> f64 {
        let d = self.position - wire.axis_point;
        let d_perp = d - wire.axis * d.dot(&wire.axis);
        self.species.mass * wire.axis.dot(&d_perp.cross(&self.velocity))
    }
}

/// Fixed-step integration parameters and event thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Time step (s).
    pub dt: f64,
    /// Integration horizon (s).
    pub max_time: f64,
    /// Terminate trajectories reaching the conductor surface.
    pub wire_collision_on: bool,
    /// Perpendicular distance at which an atom counts as gone (m).
    pub domain_radius: f64,
    /// Spin-flip flag threshold ε* for ε = ω_B/ω_L.
    pub adiabaticity_threshold: f64,
    /// Store every n-th step in a [`Trajectory`].
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1.0e-6,
            max_time: 20.0e-3,
            wire_collision_on: true,
            domain_radius: 10.0e-3,
            adiabaticity_threshold: 0.1,
            sample_stride: 100,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, wire: &WireSpec) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.max_time >= 0.0) {
            return Err(DynamicsError::Model(crate::error::ModelError::Invalid {
                what: "integrator config",
                details: format!("dt = {} s, max_time = {} s", self.dt, self.max_time),
            }));
        }
        if self.domain_radius <= wire.radius {
            return Err(DynamicsError::Model(crate::error::ModelError::Invalid {
                what: "domain radius",
                details: format!(
                    "{} m must exceed the wire radius {} m",
                    self.domain_radius, wire.radius
                ),
            }));
        }
        Ok(())
    }

    pub(crate) fn step_count(&self) -> u64 {
        (self.max_time / self.dt).round() as u64
    }
}

/// Terminal classification of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    /// Survived to max_time without an event.
    Guided,
    /// Reached the conductor surface.
    HitWire,
    /// Perpendicular distance exceeded the domain radius.
    LeftDomain,
    /// Survived to max_time but crossed the adiabaticity threshold.
    SpinFlipFlagged,
}

impl OutcomeKind {
    pub fn is_terminal(self) -> bool {
        matches!(self, OutcomeKind::HitWire | OutcomeKind::LeftDomain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Event time, or the integration horizon for surviving atoms (s).
    pub exit_time: f64,
}

/// Conserved-quantity diagnostics recorded per stored sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleDiagnostics {
    /// Total mechanical energy (J).
    pub energy: f64,
    /// Angular momentum about the wire axis (kg·m²/s).
    pub axial_angular_momentum: f64,
}

/// Stored trajectory of a single atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// States at every `sample_stride`-th step, first sample = initial state.
    pub samples: Vec<AtomState>,
    pub diagnostics: Vec<SampleDiagnostics>,
    pub outcome: Outcome,
    /// Latched when ε exceeded the threshold at any step, regardless of the
    /// terminal outcome.
    pub flagged: bool,
}

/// One velocity-Verlet step with a caller-supplied acceleration field.
///
/// `acceleration` holds a(t) on entry and a(t+dt) on return, so a loop costs
/// one field evaluation per step.
#[inline]
pub fn verlet_step(
    position: &mut Vector3<f64>,
    velocity: &mut Vector3<f64>,
    acceleration: &mut Vector3<f64>,
    dt: f64,
    accel_at: impl FnOnce(&Vector3<f64>) -> Vector3<f64>,
) {
    *position += *velocity * dt + *acceleration * (0.5 * dt * dt);
    let a_new = accel_at(position);
    *velocity += (*acceleration + a_new) * (0.5 * dt);
    *acceleration = a_new;
}

/// Advance `state` by one step of `dt` in the configured field.
pub fn step(state: &AtomState, cfg: &FieldConfig, dt: f64) -> AtomState {
    let species = state.species;
    let inv_m = 1.0 / species.mass;
    let mut pos = state.position;
    let mut vel = state.velocity;
    let mut acc = crate::potential::force(&pos, &species, cfg) * inv_m;
    verlet_step(&mut pos, &mut vel, &mut acc, dt, |p| {
        crate::potential::force(p, &species, cfg) * inv_m
    });
    AtomState {
        species,
        position: pos,
        velocity: vel,
        time: state.time + dt,
    }
}

/// Adiabaticity parameter ε = ω_B/ω_L at `state`.
///
/// ω_B is the rotation rate of the field unit vector along the instantaneous
/// velocity; at a field zero ε is the +∞ sentinel.
pub fn adiabaticity(state: &AtomState, cfg: &FieldConfig) -> f64 {
    adiabaticity_from_sample(
        &total_field_sample(&state.position, cfg),
        &state.velocity,
        state.species.mu_eff,
    )
}

pub(crate) fn adiabaticity_from_sample(
    sample: &FieldSample,
    velocity: &Vector3<f64>,
    mu_eff: f64,
) -> f64 {
    let b_norm = sample.b.norm();
    if b_norm == 0.0 {
        return f64::INFINITY;
    }
    let b_hat = sample.b / b_norm;
    let db_dt = sample.jacobian * velocity;
    let rotation = db_dt - b_hat * b_hat.dot(&db_dt);
    let omega_b = rotation.norm() / b_norm;
    if omega_b == 0.0 {
        return 0.0;
    }
    let omega_l = mu_eff * b_norm / HBAR;
    if omega_l == 0.0 {
        f64::INFINITY
    } else {
        omega_b / omega_l
    }
}

/// Speed of a circular Kepler orbit of radius `r` around the wire,
/// v = √(k/(m·r)) with k = μ₀·μ_eff·|I|/(2π).
pub fn circular_orbit_speed(
    r: f64,
    atom: &AtomSpecies,
    wire: &WireSpec,
) -> Result<f64, DynamicsError> {
    if atom.seeker != Seeker::HighField {
        return Err(DynamicsError::LowFieldSeekerOrbit);
    }
    if r <= wire.radius {
        return Err(DynamicsError::InsideWire {
            r,
            radius: wire.radius,
        });
    }
    let k = MU0_OVER_2PI * atom.mu_eff * wire.current.abs();
    Ok((k / (atom.mass * r)).sqrt())
}

/// Attraction constant k of the 1/r Kepler potential, V = −k/r (J·m).
pub fn kepler_constant(atom: &AtomSpecies, wire: &WireSpec) -> f64 {
    MU0_OVER_2PI * atom.mu_eff * wire.current.abs()
}

pub(crate) struct PropagationResult {
    pub final_state: AtomState,
    pub outcome: Outcome,
    pub flagged: bool,
}

/// Core fixed-step loop shared by [`integrate`] and the ensemble driver.
///
/// `observe` is called for every computed state including the initial one,
/// with the running step index and the flag latched so far. On an event the
/// terminal state is observed before returning.
pub(crate) fn propagate(
    initial: &AtomState,
    cfg: &FieldConfig,
    icfg: &IntegratorConfig,
    mut observe: impl FnMut(u64, &AtomState, bool),
) -> Result<PropagationResult, DynamicsError> {
    let species = initial.species;
    let inv_m = 1.0 / species.mass;
    let dt = icfg.dt;
    let t0 = initial.time;
    let n_steps = icfg.step_count();
    let wire = &cfg.wire;

    let mut pos = initial.position;
    let mut vel = initial.velocity;
    let mut flagged = false;

    let mut sample = total_field_sample(&pos, cfg);
    let mut acc = force_from_sample(&sample, &species, cfg) * inv_m;
    if adiabaticity_from_sample(&sample, &vel, species.mu_eff) > icfg.adiabaticity_threshold {
        flagged = true;
    }

    let mut state = AtomState {
        species,
        position: pos,
        velocity: vel,
        time: t0,
    };
    observe(0, &state, flagged);

    // Pre-terminated initial conditions resolve immediately.
    if let Some(kind) = event_at(&pos, wire, icfg) {
        return Ok(PropagationResult {
            final_state: state,
            outcome: Outcome {
                kind,
                exit_time: t0,
            },
            flagged,
        });
    }

    for i in 1..=n_steps {
        pos += vel * dt + acc * (0.5 * dt * dt);
        sample = total_field_sample(&pos, cfg);
        let acc_new = force_from_sample(&sample, &species, cfg) * inv_m;
        vel += (acc + acc_new) * (0.5 * dt);
        acc = acc_new;

        let t = t0 + (i as f64) * dt;
        state = AtomState {
            species,
            position: pos,
            velocity: vel,
            time: t,
        };
        if !state.is_finite() {
            return Err(DynamicsError::NonFinite {
                last_valid_time: t0 + ((i - 1) as f64) * dt,
            });
        }

        if let Some(kind) = event_at(&pos, wire, icfg) {
            observe(i, &state, flagged);
            return Ok(PropagationResult {
                final_state: state,
                outcome: Outcome { kind, exit_time: t },
                flagged,
            });
        }

        if !flagged
            && adiabaticity_from_sample(&sample, &vel, species.mu_eff)
                > icfg.adiabaticity_threshold
        {
            flagged = true;
        }
        observe(i, &state, flagged);
    }

    let kind = if flagged {
        OutcomeKind::SpinFlipFlagged
    } else {
        OutcomeKind::Guided
    };
    Ok(PropagationResult {
        final_state: state,
        outcome: Outcome {
            kind,
            exit_time: t0 + (n_steps as f64) * dt,
        },
        flagged,
    })
}

#[inline]
fn event_at(pos: &Vector3<f64>, wire: &WireSpec, icfg: &IntegratorConfig) -> Option<OutcomeKind> {
    let d = pos - wire.axis_point;
    let d_perp2 = (d - wire.axis * d.dot(&wire.axis)).norm_squared();
    if icfg.wire_collision_on && d_perp2 <= wire.radius * wire.radius {
        return Some(OutcomeKind::HitWire);
    }
    if d_perp2 >= icfg.domain_radius * icfg.domain_radius {
        return Some(OutcomeKind::LeftDomain);
    }
    None
}

/// Integrate a single atom until `max_time` or an event, storing samples at
/// the configured stride together with energy and angular-momentum
/// diagnostics.
pub fn integrate(
    initial: &AtomState,
    cfg: &FieldConfig,
    icfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    icfg.validate(&cfg.wire)?;
    let stride = icfg.sample_stride.max(1) as u64;
    let mut samples = Vec::new();
    let mut diagnostics = Vec::new();
    let result = propagate(initial, cfg, icfg, |i, state, _flagged| {
        if i % stride == 0 {
            samples.push(*state);
            diagnostics.push(SampleDiagnostics {
                energy: state.energy(cfg),
                axial_angular_momentum: state.axial_angular_momentum(&cfg.wire),
            });
        }
    })?;
    // Keep the terminal state even when it falls off the stride grid.
    if samples.last().map(|s| s.time) != Some(result.final_state.time) {
        samples.push(result.final_state);
        diagnostics.push(SampleDiagnostics {
            energy: result.final_state.energy(cfg),
            axial_angular_momentum: result.final_state.axial_angular_momentum(&cfg.wire),
        });
    }
    Ok(Trajectory {
        samples,
        diagnostics,
        outcome: result.outcome,
        flagged: result.flagged,
    })
}
