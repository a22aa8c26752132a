//! Random generators, fixtures and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use patternforge_core::body::shapes::{cylinder, icosphere, open_cylinder};
use patternforge_core::params::{Constraint, InfluenceEntry, ParameterRule, RuleKind, Target};
use patternforge_core::pattern::{Edge, EdgeRef, Panel, PatternSpec, Stitch, Vec3, Vertex2D};
use patternforge_core::template::TemplateSpec;
use patternforge_core::{BodyModel, GarmentMesh};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Star-shaped loop around the origin, counterclockwise. Curved edges bulge
/// a little, so the loop is usually but not always simple.
pub fn star_panel<R: Rng>(rng: &mut R, name: &str, curved: bool) -> Panel {
    let n = rng.random_range(3..=9usize);
    let radius = rng.random_range(5.0..40.0);
    let step = std::f64::consts::TAU / n as f64;
    let vertices: Vec<Vertex2D> = (0..n)
        .map(|i| {
            let a = step * (i as f64 + rng.random_range(-0.3..0.3));
            let r = radius * rng.random_range(0.5..1.0);
            Vertex2D::new(r * a.cos(), r * a.sin())
        })
        .collect();
    let edges = (0..n)
        .map(|i| {
            if curved && rng.random_bool(0.4) {
                Edge::curved(i, (i + 1) % n, rng.random_range(0.2..0.8), rng.random_range(-0.2..0.2))
            } else {
                Edge::straight(i, (i + 1) % n)
            }
        })
        .collect();
    Panel::new(name, vertices, edges)
}

pub fn random_pattern<R: Rng>(rng: &mut R) -> PatternSpec {
    let k = rng.random_range(1..=4usize);
    let panels: Vec<Panel> = (0..k)
        .map(|i| {
            let t = Vec3::new(rng.random_range(-50.0..50.0), rng.random_range(0.0..150.0), rng.random_range(-30.0..30.0));
            let r = Vec3::new(0.0, rng.random_range(-180.0..180.0), 0.0);
            star_panel(rng, &format!("p{i}"), true).with_placement(t, r)
        })
        .collect();
    let mut free: Vec<EdgeRef> =
        panels.iter().flat_map(|p| (0..p.edges.len()).map(move |e| EdgeRef::new(p.name.clone(), e))).collect();
    let mut stitches = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        if free.len() < 2 {
            break;
        }
        let a = free.swap_remove(rng.random_range(0..free.len()));
        let b = free.swap_remove(rng.random_range(0..free.len()));
        stitches.push(Stitch::new(a, b));
    }
    PatternSpec { panels, stitches }
}

fn random_ref<R: Rng>(rng: &mut R, p: &PatternSpec) -> EdgeRef {
    let panel = &p.panels[rng.random_range(0..p.panels.len())];
    EdgeRef::new(panel.name.clone(), rng.random_range(0..panel.edges.len()))
}

pub fn random_template<R: Rng>(rng: &mut R) -> TemplateSpec {
    let pattern = random_pattern(rng);
    let mut t = TemplateSpec::from_pattern(pattern.clone());
    for k in 0..rng.random_range(0..=4) {
        let target = if rng.random_bool(0.7) { Target::Length } else { Target::Curvature };
        let kind = if rng.random_bool(0.5) { RuleKind::Multiplicative } else { RuleKind::Additive };
        let range = match kind {
            RuleKind::Multiplicative => [rng.random_range(0.7..1.0), rng.random_range(1.0..1.5)],
            RuleKind::Additive => [rng.random_range(-3.0..0.0), rng.random_range(0.0..3.0)],
        };
        let mut influence = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let mut e = InfluenceEntry::new(random_ref(rng, &pattern));
            if rng.random_bool(0.3) {
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                e = e.along([a.cos(), a.sin()]);
                // Renormalize so the unit check holds bit for bit.
                let [x, y] = e.along.unwrap();
                let n = (x * x + y * y).sqrt();
                e.along = Some([x / n, y / n]);
            }
            if rng.random_bool(0.5) {
                e = e.toward_start();
            }
            influence.push(e);
        }
        if target == Target::Length && rng.random_bool(0.3) {
            let panel = &pattern.panels[rng.random_range(0..pattern.panels.len())];
            let n = panel.edges.len();
            let first = rng.random_range(0..n);
            let group = format!("g{k}");
            for j in 0..2.min(n - 1) {
                let r = EdgeRef::new(panel.name.clone(), (first + j) % n);
                if !influence.iter().any(|e: &InfluenceEntry| e.edge_ref == r) {
                    influence.push(InfluenceEntry::new(r).in_group(group.clone()));
                }
            }
        }
        let mut rule = ParameterRule::new(format!("param_{k}"), target, kind, range, influence);
        if rng.random_bool(0.5) {
            rule.value = rng.random_range(range[0]..=range[1]);
        }
        t.push_parameter(rule);
    }
    for _ in 0..rng.random_range(0..=2) {
        let mut c = Constraint::new(vec![random_ref(rng, &pattern), random_ref(rng, &pattern)]);
        if rng.random_bool(0.5) {
            c.multipliers = vec![rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
        }
        t.constraints.push(c);
    }
    if rng.random_bool(0.5) {
        t.parameter_order.reverse();
    }
    t
}

/// Random closed polyline. Half the time on a small integer grid, where
/// touching and collinear configurations are common.
pub fn random_polygon<R: Rng>(rng: &mut R) -> Vec<[f64; 2]> {
    let n = rng.random_range(3..=12usize);
    if rng.random_bool(0.5) {
        let m = rng.random_range(3..=6);
        (0..n).map(|_| [rng.random_range(0..m) as f64, rng.random_range(0..m) as f64]).collect()
    } else {
        (0..n).map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)]).collect()
    }
}

// ---- oracles ----

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

type QPoint = (BigRational, BigRational);

fn qp(p: &[f64; 2]) -> QPoint {
    (q(p[0]), q(p[1]))
}

fn cross(a: &QPoint, b: &QPoint, c: &QPoint) -> BigRational {
    (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0)
}

fn sign(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

fn between(a: &BigRational, b: &BigRational, x: &BigRational) -> bool {
    (a <= x && x <= b) || (b <= x && x <= a)
}

fn on_segment(a: &QPoint, b: &QPoint, p: &QPoint) -> bool {
    sign(&cross(a, b, p)) == 0 && between(&a.0, &b.0, &p.0) && between(&a.1, &b.1, &p.1)
}

fn segments_touch(a: &QPoint, b: &QPoint, c: &QPoint, d: &QPoint) -> bool {
    let (d1, d2) = (sign(&cross(a, b, c)), sign(&cross(a, b, d)));
    let (d3, d4) = (sign(&cross(c, d, a)), sign(&cross(c, d, b)));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}

/// Exact all-pairs check: consecutive segments may only share their common
/// vertex, other pairs may not touch at all.
pub fn exact_self_intersects(points: &[[f64; 2]]) -> bool {
    let n = points.len();
    if n < 3 {
        return true;
    }
    let p: Vec<QPoint> = points.iter().map(qp).collect();
    let zero = BigRational::from_integer(BigInt::from(0));
    for i in 0..n {
        if p[i] == p[(i + 1) % n] {
            return true;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&p[i], &p[(i + 1) % n]);
            let (c, d) = (&p[j], &p[(j + 1) % n]);
            let adjacent_after = j == i + 1;
            let adjacent_before = i == 0 && j == n - 1;
            if adjacent_after || adjacent_before {
                // Shared vertex s, far ends u (on the first) and w.
                let (u, s, w) = if adjacent_after { (a, b, d) } else { (b, a, c) };
                let collinear = sign(&cross(u, s, w)) == 0;
                let dot = (&u.0 - &s.0) * (&w.0 - &s.0) + (&u.1 - &s.1) * (&w.1 - &s.1);
                if collinear && dot > zero {
                    return true;
                }
                continue;
            }
            if segments_touch(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Polyline length of a quadratic Bezier with `segments` uniform steps.
pub fn dense_bezier_length(p0: Vertex2D, c: Vertex2D, p1: Vertex2D, segments: usize) -> f64 {
    let at = |t: f64| p0 * (1.0 - t) * (1.0 - t) + c * (2.0 * t * (1.0 - t)) + p1 * (t * t);
    let mut prev = p0;
    let mut total = 0.0;
    for i in 1..=segments {
        let p = at(i as f64 / segments as f64);
        total += (p - prev).norm();
        prev = p;
    }
    total
}

// ---- fixtures ----

pub const SPHERE_RADIUS: f64 = 10.0;

pub fn sphere_body() -> BodyModel {
    let (v, t) = icosphere(Vec3::zeros(), SPHERE_RADIUS, 6);
    BodyModel::new(v, t)
}

/// Horizontal square grid at height `y` whose diagonals mirror across both
/// center lines, so the mesh itself has four-fold symmetry.
pub fn symmetric_square(side: f64, n: usize, y: f64) -> GarmentMesh {
    let h = side / n as f64;
    let mut vs = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vs.push(Vec3::new(-side / 2.0 + i as f64 * h, y, side / 2.0 - j as f64 * h));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut ts = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i < n / 2) != (j < n / 2) {
                ts.push([a, b, c]);
                ts.push([a, c, d]);
            } else {
                ts.push([a, b, d]);
                ts.push([b, c, d]);
            }
        }
    }
    // Face normals up.
    let n0 = (vs[ts[0][1]] - vs[ts[0][0]]).cross(&(vs[ts[0][2]] - vs[ts[0][0]]));
    if n0.y < 0.0 {
        for t in &mut ts {
            t.swap(1, 2);
        }
    }
    GarmentMesh::uniform(vs, ts, "square")
}

pub const TUBE_RADIUS: f64 = 10.0;

pub fn tube_body() -> BodyModel {
    let (v, t) = cylinder(Vec3::new(0.0, -20.0, 0.0), Vec3::new(0.0, 40.0, 0.0), TUBE_RADIUS, 512);
    BodyModel::new(v, t)
}

/// Two flat 40×30 panels in front of and behind the tube, stitched along
/// both vertical sides.
pub fn tube_skirt() -> PatternSpec {
    let w = 40.0;
    let rect = |name: &str| Panel::polygon(name, &[[0.0, 0.0], [w, 0.0], [w, 30.0], [0.0, 30.0]]);
    PatternSpec {
        panels: vec![
            rect("front").with_placement(Vec3::new(-w / 2.0, 0.0, 15.0), Vec3::zeros()),
            rect("back").with_placement(Vec3::new(w / 2.0, 0.0, -15.0), Vec3::new(0.0, 180.0, 0.0)),
        ],
        stitches: vec![
            Stitch::new(EdgeRef::new("front", 1), EdgeRef::new("back", 3)),
            Stitch::new(EdgeRef::new("front", 3), EdgeRef::new("back", 1)),
        ],
    }
}

/// Outer open cylinder of radius 11 around a shorter inner one of radius 10,
/// both with outward normals. Returns the mesh and the number of outer faces,
/// which come first.
pub fn double_cylinder() -> (GarmentMesh, usize) {
    let (ov, ot) = open_cylinder(Vec3::zeros(), Vec3::new(0.0, 40.0, 0.0), 11.0, 64, 16);
    let outer = GarmentMesh::uniform(ov, ot, "outer");
    let (iv, it) = open_cylinder(Vec3::new(0.0, 8.0, 0.0), Vec3::new(0.0, 32.0, 0.0), 10.0, 64, 10);
    let inner = GarmentMesh::uniform(iv, it, "inner");
    let n_outer = outer.face_count();
    let mut g = outer;
    g.append(&inner);
    (g, n_outer)
}
