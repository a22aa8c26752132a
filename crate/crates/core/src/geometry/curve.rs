use super::GeometryError;
use crate::pattern::{Panel, Vertex2D};

pub const DEFAULT_LENGTH_TOL: f64 = 1e-6;

fn perp(v: Vertex2D) -> Vertex2D {
    Vertex2D::new(-v.y, v.x)
}

/// Absolute position of a control point given in the edge's similarity frame.
pub fn control_point_abs(
    start: Vertex2D,
    end: Vertex2D,
    rel: [f64; 2],
) -> Result<Vertex2D, GeometryError> {
    let d = end - start;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(GeometryError::DegenerateEdge);
    }
    Ok(start + d * rel[0] + perp(d) * rel[1])
}

fn check_edge(panel: &Panel, edge: usize) -> Result<(), GeometryError> {
    let e = panel.edges.get(edge).ok_or(GeometryError::EdgeOutOfRange {
        index: edge,
        count: panel.edges.len(),
    })?;
    for &v in &e.endpoints {
        if v >= panel.vertices.len() {
            return Err(GeometryError::VertexOutOfRange { index: v, count: panel.vertices.len() });
        }
    }
    Ok(())
}

/// Point on edge `edge` at curve parameter `t` (clamped to `[0, 1]`).
pub fn eval_edge(panel: &Panel, edge: usize, t: f64) -> Result<Vertex2D, GeometryError> {
    check_edge(panel, edge)?;
    Ok(eval_edge_unchecked(panel, edge, t))
}

pub fn eval_edge_unchecked(panel: &Panel, edge: usize, t: f64) -> Vertex2D {
    let t = t.clamp(0.0, 1.0);
    let (p0, p1) = panel.edge_endpoints(edge);
    if t == 0.0 {
        return p0;
    }
    if t == 1.0 {
        return p1;
    }
    match panel.edges[edge].curvature {
        None => p0 + (p1 - p0) * t,
        Some(rel) => match control_point_abs(p0, p1, rel) {
            Ok(c) => {
                let s = 1.0 - t;
                p0 * (s * s) + c * (2.0 * s * t) + p1 * (t * t)
            }
            Err(_) => p0,
        },
    }
}

/// Arc length of an edge. Curved edges are integrated by adaptive Simpson
/// quadrature on the curve speed until the relative error estimate drops
/// below `tol`.
pub fn edge_length(panel: &Panel, edge: usize, tol: f64) -> Result<f64, GeometryError> {
    check_edge(panel, edge)?;
    let (p0, p1) = panel.edge_endpoints(edge);
    let chord = (p1 - p0).norm();
    let Some(rel) = panel.edges[edge].curvature else {
        return Ok(chord);
    };
    if chord == 0.0 {
        return Ok(0.0);
    }
    let c = control_point_abs(p0, p1, rel)?;
    Ok(quad_bezier_length(p0, c, p1, tol))
}

pub fn edge_length_default(panel: &Panel, edge: usize) -> Result<f64, GeometryError> {
    edge_length(panel, edge, DEFAULT_LENGTH_TOL)
}

pub(crate) fn quad_bezier_length(p0: Vertex2D, c: Vertex2D, p1: Vertex2D, tol: f64) -> f64 {
    let a = c - p0;
    let b = p1 - c;
    let speed = |t: f64| ((a * (1.0 - t) + b * t) * 2.0).norm();
    // Control polygon length bounds the arc length from above.
    let scale = a.norm() + b.norm();
    let eps = tol.max(1e-15) * scale;
    let (f0, fm, f1) = (speed(0.0), speed(0.5), speed(1.0));
    let whole = (f0 + 4.0 * fm + f1) / 6.0;
    adaptive_simpson(&speed, 0.0, 1.0, f0, fm, f1, whole, eps, 40)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}
