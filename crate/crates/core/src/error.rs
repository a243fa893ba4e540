//! Error types for the model, dynamics, ensemble and analysis layers.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("invalid {what}: {details}")]
    Invalid { what: &'static str, details: String },
    #[error("no side trap exists (requires nonzero current and nonzero bias field)")]
    NoSideTrap,
    #[error("side trap at r_s = {r_s:.3e} m lies inside the wire (radius {radius:.3e} m)")]
    TrapInsideWire { r_s: f64, radius: f64 },
    #[error("no side trap for high-field seekers")]
    HighFieldSeekerSideTrap,
}

#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error("state became non-finite; last valid time {last_valid_time:.6e} s")]
    NonFinite { last_valid_time: f64 },
    #[error("circular orbits exist only for high-field seekers")]
    LowFieldSeekerOrbit,
    #[error("radius {r:.3e} m does not exceed the wire radius {radius:.3e} m")]
    InsideWire { r: f64, radius: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Error)]
pub enum EnsembleError {
    #[error("empty ensemble")]
    Empty,
    #[error("atom {index} diverged: {source}")]
    AtomDiverged { index: usize, source: DynamicsError },
    #[error("energy-based loading criterion applies only to a pure wire field (no bias)")]
    CriterionNotApplicable,
    #[error("invalid {what}: {details}")]
    Invalid { what: &'static str, details: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Error)]
pub enum ImagingError {
    #[error("pixel size must be positive, got {0}")]
    NonPositivePixelSize(f64),
    #[error("field of view {fov:?} m does not span a single pixel of {pixel_size} m")]
    FovTooSmall { fov: (f64, f64), pixel_size: f64 },
}

#[derive(Debug, Clone, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("profiles are on different coordinate grids")]
    GridMismatch,
    #[error("empty profile")]
    EmptyProfile,
    #[error("profile carries no signal")]
    ZeroSignal,
}
