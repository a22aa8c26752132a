use robust::{orient2d, Coord};

use super::curve::eval_edge_unchecked;
use crate::pattern::{Panel, Vertex2D};

pub const DEFAULT_INTERSECTION_SAMPLES: usize = 16;

pub fn panel_self_intersects(panel: &Panel) -> bool {
    panel_self_intersects_with(panel, DEFAULT_INTERSECTION_SAMPLES)
}

pub fn panel_self_intersects_with(panel: &Panel, samples_per_edge: usize) -> bool {
    if panel.vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
        return true;
    }
    polyline_self_intersects(&outline(panel, samples_per_edge))
}

/// Boundary polyline with straight edges kept exact (no interior samples)
/// and curved edges sampled at `samples_per_edge` parameters.
fn outline(panel: &Panel, samples_per_edge: usize) -> Vec<Vertex2D> {
    let steps = samples_per_edge.max(2) - 1;
    let mut out = Vec::new();
    for (k, e) in panel.edges.iter().enumerate() {
        out.push(panel.vertices[e.start()]);
        if e.curvature.is_some() {
            out.extend((1..steps).map(|i| eval_edge_unchecked(panel, k, i as f64 / steps as f64)));
        }
    }
    out
}

fn coord(p: Vertex2D) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

fn orient(a: Vertex2D, b: Vertex2D, c: Vertex2D) -> f64 {
    orient2d(coord(a), coord(b), coord(c))
}

// `p` is known collinear with segment ab.
fn within_box(a: Vertex2D, b: Vertex2D, p: Vertex2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn closed_segments_meet(a: Vertex2D, b: Vertex2D, c: Vertex2D, d: Vertex2D) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && within_box(a, b, c))
        || (o2 == 0.0 && within_box(a, b, d))
        || (o3 == 0.0 && within_box(c, d, a))
        || (o4 == 0.0 && within_box(c, d, b))
}

/// Consecutive segments `a→b`, `b→c` overlap beyond `b` only when they fold
/// back onto each other along a common line.
fn folds_back(a: Vertex2D, b: Vertex2D, c: Vertex2D) -> bool {
    orient(a, b, c) == 0.0 && (a - b).dot(&(c - b)) > 0.0
}

/// True if the closed polyline through `points` touches itself anywhere other
/// than at the shared endpoints of consecutive segments.
///
/// Candidate pairs come from a sweep over segment x-extents; each candidate
/// is decided with exact orientation predicates.
pub fn polyline_self_intersects(points: &[Vertex2D]) -> bool {
    let n = points.len();
    if n < 3 {
        return true;
    }
    if (0..n).any(|i| points[i] == points[(i + 1) % n]) {
        return true;
    }
    for i in 0..n {
        if folds_back(points[i], points[(i + 1) % n], points[(i + 2) % n]) {
            return true;
        }
    }

    let seg = |i: usize| (points[i], points[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let min_x = |i: usize| {
        let (a, b) = seg(i);
        a.x.min(b.x)
    };
    order.sort_by(|&i, &j| min_x(i).total_cmp(&min_x(j)));

    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let (a, b) = seg(i);
        let (lo_x, lo_y, hi_y) = (a.x.min(b.x), a.y.min(b.y), a.y.max(b.y));
        active.retain(|&j| {
            let (c, d) = seg(j);
            c.x.max(d.x) >= lo_x
        });
        for &j in &active {
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (c, d) = seg(j);
            if c.y.max(d.y) < lo_y || c.y.min(d.y) > hi_y {
                continue;
            }
            if closed_segments_meet(a, b, c, d) {
                return true;
            }
        }
        active.push(i);
    }
    false
}
