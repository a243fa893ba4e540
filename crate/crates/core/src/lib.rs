//! Simulation of magnetic guiding of cold neutral atoms along a current-carrying wire.
//!
//! Two guide types are modeled. High-field-seeking atoms are attracted by the
//! field of the wire and move in Kepler-like orbits around it. Adding a
//! homogeneous bias field perpendicular to the wire cancels the wire field
//! along a line parallel to the wire; low-field-seeking atoms are confined in
//! the field-minimum tube around that line and guided on the side of the wire.
//!
//! The crate provides the field/potential model ([`field`], [`potential`],
//! [`sidetrap`]), symplectic trajectory integration with event detection
//! ([`dynamics`]), seeded Monte Carlo ensembles ([`ensemble`]), and the
//! virtual-imaging / profile-analysis pipeline ([`imaging`], [`analysis`],
//! [`fit`]). All internal quantities are SI.

pub mod analysis;
pub mod constants;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod fit;
pub mod imaging;
pub mod potential;
pub mod sidetrap;
pub mod species;
pub mod units;

pub use nalgebra::{Matrix3, Vector3};

pub use dynamics::{AtomState, IntegratorConfig, Outcome, OutcomeKind, Trajectory};
pub use ensemble::{EnsembleSnapshot, MotParams, SeekerFractions, SequenceSpec};
pub use error::{AnalysisError, DynamicsError, EnsembleError, ImagingError, ModelError};
pub use field::{BiasFieldSpec, FieldConfig, WireSpec};
pub use species::{AtomSpecies, Seeker};
