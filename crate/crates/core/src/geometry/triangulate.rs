use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::boundary::signed_area_points;
use super::curve::eval_edge_unchecked;
use super::GeometryError;
use crate::pattern::{Panel, Vertex2D};

/// Where a boundary mesh vertex sits on the panel outline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParam {
    pub edge: usize,
    /// Normalized arc-length position along the edge, in `[0, 1)`.
    pub s: f64,
}

/// Triangulated panel. The first `boundary.len()` vertices are the boundary
/// loop in edge order; the rest are interior.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelMesh2D {
    pub vertices: Vec<Vertex2D>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryParam>,
}

impl PanelMesh2D {
    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    /// Boundary vertices on `edge` with their arc-length parameters, from
    /// `s = 0` through the shared end vertex at `s = 1`.
    pub fn edge_vertices(&self, edge: usize) -> Vec<(usize, f64)> {
        let n = self.boundary.len();
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (i, b) in self.boundary.iter().enumerate() {
            if b.edge == edge {
                out.push((i, b.s));
            }
        }
        if let Some(&(last, _)) = out.last() {
            out.push(((last + 1) % n, 1.0));
        }
        out
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
        0.5 * ((b - a).perp(&(c - a)))
    }
}

const DENSE_SAMPLES: usize = 64;

fn dense_edge(panel: &Panel, edge: usize) -> (Vec<Vertex2D>, Vec<f64>) {
    let dense: Vec<Vertex2D> = (0..=DENSE_SAMPLES)
        .map(|k| eval_edge_unchecked(panel, edge, k as f64 / DENSE_SAMPLES as f64))
        .collect();
    let mut cumulative = vec![0.0; dense.len()];
    for k in 1..dense.len() {
        cumulative[k] = cumulative[k - 1] + (dense[k] - dense[k - 1]).norm();
    }
    (dense, cumulative)
}

/// Number of equal arc-length segments per edge so that none is longer
/// than `target`.
pub fn edge_segments(panel: &Panel, target: f64) -> Vec<usize> {
    (0..panel.edges.len())
        .map(|edge| {
            let len = if panel.edges[edge].curvature.is_none() {
                let (p0, p1) = panel.edge_endpoints(edge);
                (p1 - p0).norm()
            } else {
                dense_edge(panel, edge).1[DENSE_SAMPLES]
            };
            (len / target).ceil().max(1.0) as usize
        })
        .collect()
}

/// Resample each edge at `segments[edge]` equal arc-length steps.
fn resample_boundary(panel: &Panel, segments: &[usize]) -> (Vec<Vertex2D>, Vec<BoundaryParam>) {
    let mut points = Vec::new();
    let mut params = Vec::new();
    for (edge, &count) in segments.iter().enumerate().take(panel.edges.len()) {
        let m = count.max(1);
        if panel.edges[edge].curvature.is_none() {
            let (p0, p1) = panel.edge_endpoints(edge);
            for k in 0..m {
                let s = k as f64 / m as f64;
                points.push(if k == 0 { p0 } else { p0 + (p1 - p0) * s });
                params.push(BoundaryParam { edge, s });
            }
            continue;
        }
        let (dense, cumulative) = dense_edge(panel, edge);
        let total = cumulative[DENSE_SAMPLES];
        let mut seg = 0;
        for k in 0..m {
            let s = k as f64 / m as f64;
            if k == 0 {
                points.push(dense[0]);
                params.push(BoundaryParam { edge, s });
                continue;
            }
            let want = s * total;
            while seg + 1 < DENSE_SAMPLES && cumulative[seg + 1] < want {
                seg += 1;
            }
            let span = cumulative[seg + 1] - cumulative[seg];
            let f = if span > 0.0 { (want - cumulative[seg]) / span } else { 0.0 };
            points.push(dense[seg] + (dense[seg + 1] - dense[seg]) * f);
            params.push(BoundaryParam { edge, s });
        }
    }
    (points, params)
}

fn point_segment_distance(p: Vertex2D, a: Vertex2D, b: Vertex2D) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

fn winding_inside(p: Vertex2D, poly: &[Vertex2D]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Conforming triangulation of a simple panel with boundary spacing at most
/// `target_edge_len`.
///
/// Interior points are seeded on an equilateral lattice, the boundary is
/// inserted as constraint edges, and Delaunay refinement removes remaining
/// oversized triangles without splitting the boundary.
pub fn triangulate_panel(panel: &Panel, target_edge_len: f64) -> Result<PanelMesh2D, GeometryError> {
    if !(target_edge_len > 0.0) {
        return Err(GeometryError::Triangulation("target edge length must be positive".into()));
    }
    triangulate_panel_with(panel, target_edge_len, &edge_segments(panel, target_edge_len))
}

/// As [`triangulate_panel`], with the number of boundary segments on each
/// edge given explicitly (stitched edges need matching counts).
pub fn triangulate_panel_with(
    panel: &Panel,
    target_edge_len: f64,
    segments: &[usize],
) -> Result<PanelMesh2D, GeometryError> {
    if !(target_edge_len > 0.0) {
        return Err(GeometryError::Triangulation("target edge length must be positive".into()));
    }
    if segments.len() != panel.edges.len() {
        return Err(GeometryError::Triangulation(format!(
            "{} segment counts for {} edges",
            segments.len(),
            panel.edges.len()
        )));
    }
    let (mut boundary_pts, boundary) = resample_boundary(panel, segments);
    let area = signed_area_points(&boundary_pts);
    if boundary_pts.len() < 3 || area.abs() < 1e-9 {
        return Err(GeometryError::Triangulation(format!(
            "panel '{}' has near-zero area",
            panel.name
        )));
    }
    if area < 0.0 {
        return Err(GeometryError::Triangulation(format!(
            "panel '{}' boundary is clockwise",
            panel.name
        )));
    }
    let nb = boundary_pts.len();

    let h = target_edge_len;
    let (mut lo, mut hi) = (boundary_pts[0], boundary_pts[0]);
    for p in &boundary_pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let row_h = h * 3f64.sqrt() / 2.0;
    let clearance = 0.55 * h;
    let mut row = 0usize;
    let mut y = lo.y + row_h * 0.5;
    while y < hi.y {
        let mut x = lo.x + if row.is_multiple_of(2) { 0.5 * h } else { h };
        while x < hi.x {
            let p = Vertex2D::new(x, y);
            if winding_inside(p, &boundary_pts[..nb])
                && (0..nb).all(|i| {
                    point_segment_distance(p, boundary_pts[i], boundary_pts[(i + 1) % nb]) >= clearance
                })
            {
                boundary_pts.push(p);
            }
            x += h;
        }
        y += row_h;
        row += 1;
    }

    let input: Vec<Point2<f64>> = boundary_pts.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let constraints: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(input, constraints)
        .map_err(|e| GeometryError::Triangulation(format!("{e:?}")))?;
    if cdt.num_vertices() != boundary_pts.len() {
        return Err(GeometryError::Triangulation("duplicate boundary points".into()));
    }
    let max_area = 3f64.sqrt() / 4.0 * h * h;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .keep_constraint_edges()
            .with_angle_limit(AngleLimit::from_deg(20.0))
            .with_max_allowed_area(max_area)
            .with_min_required_area(1e-6 * h * h)
            .with_max_additional_vertices(20 * boundary_pts.len() + 1000),
    );
    let excluded: std::collections::HashSet<_> = result.excluded_faces.iter().copied().collect();

    let vertices: Vec<Vertex2D> =
        cdt.vertices().map(|v| Vertex2D::new(v.position().x, v.position().y)).collect();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        triangles.push([a, b, c]);
    }
    let mesh = PanelMesh2D { vertices, triangles, boundary };
    if mesh.triangles.iter().any(|t| mesh.triangle_area(t) < 1e-9) {
        return Err(GeometryError::Triangulation(format!(
            "panel '{}' produced a degenerate triangle",
            panel.name
        )));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_boundary, signed_area};
    use crate::pattern::Edge;

    fn square(side: f64) -> Panel {
        Panel::polygon("sq", &[[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]])
    }

    fn max_edge(mesh: &PanelMesh2D) -> f64 {
        let mut m: f64 = 0.0;
        for t in &mesh.triangles {
            for k in 0..3 {
                m = m.max((mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]).norm());
            }
        }
        m
    }

    #[test]
    fn square_ten_by_target_five() {
        let mesh = triangulate_panel(&square(10.0), 5.0).unwrap();
        assert!(mesh.boundary_len() >= 8);
        assert!(mesh.triangles.iter().all(|t| mesh.triangle_area(t) > 0.0));
        assert!((mesh.area() - 100.0).abs() < 1e-6 * 100.0);
    }

    #[test]
    fn interior_edges_respect_resolution() {
        for (side, h) in [(10.0, 1.0), (37.0, 3.0), (20.0, 2.5)] {
            let mesh = triangulate_panel(&square(side), h).unwrap();
            assert!(max_edge(&mesh) <= 1.5 * h, "max edge {} for h {h}", max_edge(&mesh));
        }
    }

    #[test]
    fn curved_panel_area_matches_boundary_polygon() {
        let mut p = square(20.0);
        p.edges[2] = Edge::curved(2, 3, 0.5, 0.2);
        p.edges[0] = Edge::curved(0, 1, 0.4, 0.1);
        let mesh = triangulate_panel(&p, 2.0).unwrap();
        let boundary: Vec<_> = mesh.vertices[..mesh.boundary_len()].to_vec();
        let poly_area = signed_area_points(&boundary);
        assert!((mesh.area() - poly_area).abs() < 1e-6 * poly_area);
        // Resampled outline approximates the analytic one.
        let fine = signed_area(&sample_boundary(&p, 200));
        assert!((poly_area - fine).abs() < 0.01 * fine);
    }

    #[test]
    fn boundary_params_are_monotone_per_edge() {
        let mut p = square(15.0);
        p.edges[1] = Edge::curved(1, 2, 0.5, -0.15);
        let mesh = triangulate_panel(&p, 2.0).unwrap();
        for e in 0..4 {
            let vs = mesh.edge_vertices(e);
            assert!(vs.iter().all(|&(_, s)| (0.0..=1.0).contains(&s)));
            assert!(vs.windows(2).all(|w| w[0].1 < w[1].1));
            assert_eq!(vs.last().unwrap().1, 1.0);
        }
        for i in 0..mesh.boundary_len() {
            let j = (i + 1) % mesh.boundary_len();
            assert!((mesh.vertices[i] - mesh.vertices[j]).norm() <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn degenerate_panel_fails() {
        let p = Panel::polygon("flat", &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!(triangulate_panel(&p, 0.5).is_err());
    }
}
