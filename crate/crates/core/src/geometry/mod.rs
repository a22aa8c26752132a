//! 2D geometry kernel for panels: edge curves, boundary sampling,
//! self-intersection tests, and triangulation.

mod boundary;
mod curve;
mod intersect;
pub mod svg;
mod triangulate;

pub use boundary::{sample_boundary, signed_area, signed_area_points, Polyline2D, PointTag};
pub use curve::{
    control_point_abs, edge_length, edge_length_default, eval_edge, eval_edge_unchecked,
    DEFAULT_LENGTH_TOL,
};
pub use intersect::{
    panel_self_intersects, panel_self_intersects_with, polyline_self_intersects,
    DEFAULT_INTERSECTION_SAMPLES,
};
pub use triangulate::{edge_segments, triangulate_panel, triangulate_panel_with, BoundaryParam, PanelMesh2D};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate edge: start and end coincide")]
    DegenerateEdge,
    #[error("edge index {index} out of range for panel with {count} edges")]
    EdgeOutOfRange { index: usize, count: usize },
    #[error("vertex index {index} out of range for panel with {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
}
