//! Exact triangle–triangle intersection on closed triangles
//! (Guigue–Devillers orientation tests with adaptive-precision predicates).

use robust::{orient2d, orient3d, Coord, Coord3D};

use crate::pattern::Vec3;

fn c3(p: &Vec3) -> Coord3D<f64> {
    Coord3D { x: p.x, y: p.y, z: p.z }
}

/// Sign of `(d − c) · ((a − c) × (b − c))`.
fn orient(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    -orient3d(c3(a), c3(b), c3(c), c3(d))
}

/// True when the closed triangles share at least one point.
pub fn triangles_intersect(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    let [p1, q1, r1] = t1;
    let [p2, q2, r2] = t2;
    let dp1 = orient(p2, q2, r2, p1);
    let dq1 = orient(p2, q2, r2, q1);
    let dr1 = orient(p2, q2, r2, r1);
    if dp1 * dq1 > 0.0 && dp1 * dr1 > 0.0 {
        return false;
    }
    let dp2 = orient(p1, q1, r1, p2);
    let dq2 = orient(p1, q1, r1, q2);
    let dr2 = orient(p1, q1, r1, r2);
    if dp2 * dq2 > 0.0 && dp2 * dr2 > 0.0 {
        return false;
    }
    let d2 = (dp2, dq2, dr2);
    let d2s = (dp2, dr2, dq2);
    if dp1 > 0.0 {
        if dq1 > 0.0 {
            tri_tri(r1, p1, q1, p2, r2, q2, d2s, t1, t2)
        } else if dr1 > 0.0 {
            tri_tri(q1, r1, p1, p2, r2, q2, d2s, t1, t2)
        } else {
            tri_tri(p1, q1, r1, p2, q2, r2, d2, t1, t2)
        }
    } else if dp1 < 0.0 {
        if dq1 < 0.0 {
            tri_tri(r1, p1, q1, p2, q2, r2, d2, t1, t2)
        } else if dr1 < 0.0 {
            tri_tri(q1, r1, p1, p2, q2, r2, d2, t1, t2)
        } else {
            tri_tri(p1, q1, r1, p2, r2, q2, d2s, t1, t2)
        }
    } else if dq1 < 0.0 {
        if dr1 >= 0.0 {
            tri_tri(q1, r1, p1, p2, r2, q2, d2s, t1, t2)
        } else {
            tri_tri(p1, q1, r1, p2, q2, r2, d2, t1, t2)
        }
    } else if dq1 > 0.0 {
        if dr1 > 0.0 {
            tri_tri(p1, q1, r1, p2, r2, q2, d2s, t1, t2)
        } else {
            tri_tri(q1, r1, p1, p2, q2, r2, d2, t1, t2)
        }
    } else if dr1 > 0.0 {
        tri_tri(r1, p1, q1, p2, q2, r2, d2, t1, t2)
    } else if dr1 < 0.0 {
        tri_tri(r1, p1, q1, p2, r2, q2, d2s, t1, t2)
    } else {
        coplanar(t1, t2)
    }
}

#[allow(clippy::too_many_arguments)]
fn tri_tri(
    p1: &Vec3,
    q1: &Vec3,
    r1: &Vec3,
    p2: &Vec3,
    q2: &Vec3,
    r2: &Vec3,
    (dp2, dq2, dr2): (f64, f64, f64),
    t1: &[Vec3; 3],
    t2: &[Vec3; 3],
) -> bool {
    if dp2 > 0.0 {
        if dq2 > 0.0 {
            min_max(p1, r1, q1, r2, p2, q2)
        } else if dr2 > 0.0 {
            min_max(p1, r1, q1, q2, r2, p2)
        } else {
            min_max(p1, q1, r1, p2, q2, r2)
        }
    } else if dp2 < 0.0 {
        if dq2 < 0.0 {
            min_max(p1, q1, r1, r2, p2, q2)
        } else if dr2 < 0.0 {
            min_max(p1, q1, r1, q2, r2, p2)
        } else {
            min_max(p1, r1, q1, p2, q2, r2)
        }
    } else if dq2 < 0.0 {
        if dr2 >= 0.0 {
            min_max(p1, r1, q1, q2, r2, p2)
        } else {
            min_max(p1, q1, r1, p2, q2, r2)
        }
    } else if dq2 > 0.0 {
        if dr2 > 0.0 {
            min_max(p1, r1, q1, p2, q2, r2)
        } else {
            min_max(p1, q1, r1, q2, r2, p2)
        }
    } else if dr2 > 0.0 {
        min_max(p1, q1, r1, r2, p2, q2)
    } else if dr2 < 0.0 {
        min_max(p1, r1, q1, r2, p2, q2)
    } else {
        coplanar(t1, t2)
    }
}

fn min_max(p1: &Vec3, q1: &Vec3, r1: &Vec3, p2: &Vec3, q2: &Vec3, r2: &Vec3) -> bool {
    orient(p2, p1, q1, q2) <= 0.0 && orient(p2, r1, p1, r2) <= 0.0
}

fn c2(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = orient2d(c2(a), c2(b), c2(c));
    let o2 = orient2d(c2(a), c2(b), c2(d));
    let o3 = orient2d(c2(c), c2(d), c2(a));
    let o4 = orient2d(c2(c), c2(d), c2(b));
    let between = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && between(a, b, c))
        || (o2 == 0.0 && between(a, b, d))
        || (o3 == 0.0 && between(c, d, a))
        || (o4 == 0.0 && between(c, d, b))
}

fn point_in_triangle(p: [f64; 2], t: &[[f64; 2]; 3]) -> bool {
    let s: Vec<f64> = (0..3).map(|k| orient2d(c2(t[k]), c2(t[(k + 1) % 3]), c2(p))).collect();
    (s.iter().all(|&v| v >= 0.0)) || (s.iter().all(|&v| v <= 0.0))
}

/// Both triangles lie in one plane: drop the coordinate along the dominant
/// normal axis and test in 2D.
fn coplanar(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    let mut n = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    if n.norm_squared() == 0.0 {
        n = (t2[1] - t2[0]).cross(&(t2[2] - t2[0]));
    }
    let a = n.abs();
    let (i, j) = if a.x >= a.y && a.x >= a.z {
        (1, 2)
    } else if a.y >= a.z {
        (0, 2)
    } else {
        (0, 1)
    };
    let proj = |t: &[Vec3; 3]| t.map(|p| [p[i], p[j]]);
    let (u, v) = (proj(t1), proj(t2));
    for k in 0..3 {
        for l in 0..3 {
            if segments_intersect(u[k], u[(k + 1) % 3], v[l], v[(l + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle(u[0], &v) || point_in_triangle(v[0], &u)
}
