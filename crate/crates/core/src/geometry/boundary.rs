use serde::{Deserialize, Serialize};

use super::curve::eval_edge_unchecked;
use crate::pattern::{Panel, Vertex2D};

/// Provenance of a sampled boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTag {
    pub edge: usize,
    pub t: f64,
}

/// Closed polyline; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polyline2D {
    pub points: Vec<Vertex2D>,
    pub tags: Vec<PointTag>,
}

impl Polyline2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points belonging to one source edge, in traversal order, including
    /// the shared end point taken from the following edge.
    pub fn edge_points(&self, edge: usize) -> Vec<Vertex2D> {
        let n = self.points.len();
        let mut out: Vec<Vertex2D> = Vec::new();
        for i in 0..n {
            if self.tags[i].edge == edge {
                out.push(self.points[i]);
                if self.tags[(i + 1) % n].edge != edge {
                    out.push(self.points[(i + 1) % n]);
                }
            }
        }
        out
    }
}

/// Sample every edge at `samples_per_edge` uniformly spaced curve parameters
/// and join them in loop order. Each edge contributes its start point and
/// interior samples; its end point is the next edge's start.
pub fn sample_boundary(panel: &Panel, samples_per_edge: usize) -> Polyline2D {
    let samples = samples_per_edge.max(2);
    let steps = samples - 1;
    let mut out = Polyline2D {
        points: Vec::with_capacity(panel.edges.len() * steps),
        tags: Vec::with_capacity(panel.edges.len() * steps),
    };
    for edge in 0..panel.edges.len() {
        for k in 0..steps {
            let t = k as f64 / steps as f64;
            out.points.push(eval_edge_unchecked(panel, edge, t));
            out.tags.push(PointTag { edge, t });
        }
    }
    out
}

/// Shoelace area; positive for counterclockwise loops.
pub fn signed_area(poly: &Polyline2D) -> f64 {
    signed_area_points(&poly.points)
}

pub fn signed_area_points(points: &[Vertex2D]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        twice += a.x * b.y - b.x * a.y;
    }
    0.5 * twice
}
