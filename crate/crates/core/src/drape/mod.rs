//! Garment assembly, cloth draping and simulation quality checks.

mod assemble;
mod quality;
mod sim;
pub mod tritri;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble_garment, Assembly, StitchPair, StitchPairs, STITCH_LENGTH_TOLERANCE};
pub use quality::{intersecting_faces, quality_check, Quality};
pub use sim::{simulate, Solver, StepOutcome};

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum DrapeError {
    #[error("resolution must be a positive finite length, got {0}")]
    InvalidResolution(f64),
    #[error("stitch references missing edge {0}")]
    DanglingStitch(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("{0} labels for {1} vertices")]
    LabelCount(usize, usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Cloth material and solver settings. Gravity pulls along −y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// cm/s²
    pub gravity: f64,
    /// Seconds per frame.
    pub time_step: f64,
    pub solver_iterations: u32,
    pub stretch_stiffness: f64,
    pub bend_stiffness: f64,
    pub stitch_stiffness: f64,
    /// Distance (cm) kept between cloth vertices and the body surface.
    pub collision_offset: f64,
    pub max_frames: u32,
    /// Mean vertex speed (cm/s) under which the drape counts as settled.
    pub rest_threshold: f64,
    /// Fraction of velocity removed each frame.
    pub damping: f64,
    /// Coulomb coefficient between cloth and body.
    pub friction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            gravity: 981.0,
            time_step: 1.0 / 60.0,
            solver_iterations: 10,
            stretch_stiffness: 1.0,
            bend_stiffness: 0.02,
            stitch_stiffness: 1.0,
            collision_offset: 0.3,
            max_frames: 300,
            rest_threshold: 1.0,
            damping: 0.02,
            friction: 0.5,
        }
    }
}

impl SimConfig {
    pub fn check(&self) -> Result<(), DrapeError> {
        let bad = |m: &str| Err(DrapeError::InvalidConfig(m.to_string()));
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return bad("time_step must be positive");
        }
        if self.solver_iterations < 1 {
            return bad("solver_iterations must be at least 1");
        }
        if !(self.collision_offset > 0.0 && self.collision_offset.is_finite()) {
            return bad("collision_offset must be positive");
        }
        if !self.gravity.is_finite() || !(self.rest_threshold >= 0.0) {
            return bad("gravity and rest_threshold must be finite");
        }
        if !(self.friction >= 0.0 && self.friction.is_finite()) {
            return bad("friction must be a non-negative coefficient");
        }
        for (name, k) in [
            ("stretch_stiffness", self.stretch_stiffness),
            ("bend_stiffness", self.bend_stiffness),
            ("stitch_stiffness", self.stitch_stiffness),
            ("damping", self.damping),
        ] {
            if !(0.0..=1.0).contains(&k) {
                return Err(DrapeError::InvalidConfig(format!("{name} must be in [0, 1], got {k}")));
            }
        }
        Ok(())
    }

    /// Frames over which stitch rest lengths shrink to zero.
    pub fn anneal_frames(&self) -> u32 {
        ((0.2 * self.max_frames as f64).ceil() as u32).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimReport {
    pub frames_run: u32,
    pub converged: bool,
    pub body_penetration_count: usize,
    pub self_intersection_count: usize,
    /// Set when a coordinate became NaN or infinite.
    #[serde(default)]
    pub non_finite: bool,
    pub failed: bool,
}
