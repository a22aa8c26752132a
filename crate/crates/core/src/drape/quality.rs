use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::tritri::triangles_intersect;
use super::StitchPairs;
use crate::body::BodyModel;
use crate::bvh::{Aabb, Bvh};
use crate::mesh::GarmentMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Quality {
    pub body_penetration_count: usize,
    pub self_intersection_count: usize,
}

impl Quality {
    pub fn failed(&self) -> bool {
        self.body_penetration_count > 0 || self.self_intersection_count > 0
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Count vertices more than `0.5 · collision_offset` inside the body and
/// intersecting pairs of non-adjacent garment triangles.
///
/// Triangles are adjacent when they share a vertex. Sewn vertices count as
/// one, and near a seam two triangles are also adjacent when they touch
/// sewn vertices joined by a mesh edge, since closed seams leave the two
/// panels' border triangles meeting at slightly different positions.
pub fn quality_check(g: &GarmentMesh, body: &BodyModel, collision_offset: f64, pairs: &StitchPairs) -> Quality {
    let depth = 0.5 * collision_offset;
    let body_penetration_count = g.vertices.iter().filter(|v| body.signed_distance(v) < -depth).count();
    Quality { body_penetration_count, self_intersection_count: self_intersections(g, pairs) }
}

pub(crate) fn self_intersections(g: &GarmentMesh, pairs: &StitchPairs) -> usize {
    intersecting_faces(g, pairs).len()
}

/// Pairs `(f, g)` with `f < g` of non-adjacent intersecting triangles.
pub fn intersecting_faces(g: &GarmentMesh, pairs: &StitchPairs) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut sewn = vec![false; n];
    for p in pairs.iter() {
        let (a, b) = (find(&mut parent, p.a), find(&mut parent, p.b));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
        sewn[p.a] = true;
        sewn[p.b] = true;
    }
    let class: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut seam_links: HashSet<(usize, usize)> = HashSet::new();
    for t in &g.triangles {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            if sewn[i] && sewn[j] {
                let (a, b) = (class[i], class[j]);
                seam_links.insert((a.min(b), a.max(b)));
            }
        }
    }
    let adjacent = |t: &[usize; 3], u: &[usize; 3]| {
        t.iter().any(|&i| {
            u.iter().any(|&j| {
                let (a, b) = (class[i], class[j]);
                a == b || (sewn[i] && sewn[j] && seam_links.contains(&(a.min(b), a.max(b))))
            })
        })
    };

    let bvh = Bvh::from_mesh(&g.vertices, &g.triangles);
    let mut out = Vec::new();
    for (f, t) in g.triangles.iter().enumerate() {
        let tri = g.triangle(f);
        for other in bvh.query_aabb(&Aabb::of_points(&tri)) {
            if other <= f || adjacent(t, &g.triangles[other]) {
                continue;
            }
            if triangles_intersect(&tri, &g.triangle(other)) {
                out.push((f, other));
            }
        }
    }
    out
}
