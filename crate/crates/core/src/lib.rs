//! Synthetic garment dataset generation from parametric sewing-pattern
//! templates.
//!
//! The pipeline runs in stages:
//!
//! - [`template`]: JSON template documents (base pattern, parameter rules,
//!   constraints) with [`validate`] diagnostics and [`canonical`] ordering.
//! - [`params`]: rule application, constraint repair, and seeded sampling
//!   with self-intersection rejection ([`geometry`]).
//! - [`drape`]: assembly of panels into a labelled 3D mesh and a
//!   position-based cloth solve on a body mesh, with quality flags.
//! - [`scan`]: removal of faces that cannot be seen from the walls of a
//!   virtual scanner box.
//! - [`pipeline`]: batch generation with deterministic per-sample seeds.
//!
//! Lengths are centimeters and Euler angles are degrees throughout.

// `!(x > 0.0)` is the NaN-rejecting form used for input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod bvh;
pub mod canonical;
pub mod drape;
pub mod geometry;
pub mod mesh;
pub mod params;
pub mod pattern;
pub mod pipeline;
pub mod scan;
pub mod template;
pub mod templates;
pub mod validate;

pub use body::BodyModel;
pub use canonical::{canonicalize, canonicalize_template};
pub use drape::{assemble_garment, quality_check, simulate, Assembly, SimConfig, SimReport, StitchPairs};
pub use mesh::GarmentMesh;
pub use params::{
    apply_all, apply_constraints, apply_parameter, restore_constraints, sample_pattern, Constraint,
    InfluenceEntry, ParameterRule, RuleKind, SampleRecord, Target,
};
pub use pattern::{Edge, EdgeRef, Panel, PatternSpec, Stitch, Vec3, Vertex2D};
pub use pipeline::{generate_dataset, DatasetManifest, PipelineConfig, SampleStatus};
pub use scan::{scan_detailed, scan_imitate, ScanConfig, ScanResult};
pub use template::{parse_template, serialize_template, ParseError, TemplateSpec};
pub use validate::{validate, validate_template, Diagnostic, Severity};

/// Reported in dataset manifests.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
