//! Body meshes: signed distance queries for collision, ray occlusion for
//! scanning, and a few procedural shapes.

use std::collections::HashMap;
use std::path::Path;

use crate::bvh::{Aabb, Bvh, Feature};
use crate::mesh::{parse_obj, write_obj, MeshError};
use crate::pattern::Vec3;

/// Nearest body surface point to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceQuery {
    /// Positive outside, negative inside.
    pub distance: f64,
    pub point: Vec3,
    /// Unit direction from the surface point toward the outside.
    pub normal: Vec3,
}

#[derive(Debug, Clone)]
struct Component {
    bvh: Bvh,
    faces: Vec<usize>,
    bounds: Aabb,
}

/// Closed triangle surface (possibly several overlapping shells) with
/// outward-facing winding.
#[derive(Debug, Clone)]
pub struct BodyModel {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    face_normals: Vec<Vec3>,
    vertex_normals: Vec<Vec3>,
    edge_normals: HashMap<(usize, usize), Vec3>,
    components: Vec<Component>,
    all: Bvh,
    watertight: bool,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl BodyModel {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Self {
        let face_normals: Vec<Vec3> = triangles
            .iter()
            .map(|t| {
                let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
                n.try_normalize(0.0).unwrap_or_else(Vec3::zeros)
            })
            .collect();

        // Angle-weighted vertex normals and summed edge normals give a sign
        // test that is exact on closed surfaces.
        let mut vertex_normals = vec![Vec3::zeros(); vertices.len()];
        let mut edge_normals: HashMap<(usize, usize), Vec3> = HashMap::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (i, j, l) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                let u = vertices[j] - vertices[i];
                let w = vertices[l] - vertices[i];
                let angle = u.angle(&w);
                if angle.is_finite() {
                    vertex_normals[i] += face_normals[f] * angle;
                }
                *edge_normals.entry(edge_key(i, j)).or_insert_with(Vec3::zeros) += face_normals[f];
                *directed.entry((i, j)).or_insert(0) += 1;
            }
        }
        for n in &mut vertex_normals {
            *n = n.try_normalize(0.0).unwrap_or_else(Vec3::zeros);
        }
        for n in edge_normals.values_mut() {
            *n = n.try_normalize(0.0).unwrap_or_else(Vec3::zeros);
        }
        let watertight = !triangles.is_empty()
            && directed.iter().all(|(&(i, j), &c)| c == 1 && directed.get(&(j, i)) == Some(&1));
        if !watertight {
            log::warn!("body mesh is not a closed oriented surface; inside/outside tests may be unreliable");
        }

        let components = connected_components(vertices.len(), &triangles)
            .into_iter()
            .map(|faces| {
                let tris: Vec<[Vec3; 3]> = faces.iter().map(|&f| triangles[f].map(|i| vertices[i])).collect();
                let bvh = Bvh::new(tris);
                Component { bounds: bvh.bounds(), bvh, faces }
            })
            .collect();
        let all = Bvh::from_mesh(&vertices, &triangles);
        Self { vertices, triangles, face_normals, vertex_normals, edge_normals, components, all, watertight }
    }

    pub fn from_obj_str(text: &str) -> Result<Self, MeshError> {
        let (v, t) = parse_obj(text)?;
        Ok(Self::new(v, t))
    }

    pub fn load(path: &Path) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| MeshError::Io { path: path.display().to_string(), source })?;
        Self::from_obj_str(&text)
    }

    pub fn to_obj(&self) -> String {
        write_obj(&self.vertices, &self.triangles)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_watertight(&self) -> bool {
        self.watertight
    }

    pub fn bounds(&self) -> Aabb {
        self.all.bounds()
    }

    /// BVH over every body triangle; indices match [`Self::triangles`].
    pub fn bvh(&self) -> &Bvh {
        &self.all
    }

    pub fn translated(&self, by: Vec3) -> Self {
        Self::new(self.vertices.iter().map(|v| v + by).collect(), self.triangles.clone())
    }

    /// Reflection through the x = 0 plane, with winding flipped to stay outward.
    pub fn mirrored_x(&self) -> Self {
        Self::new(
            self.vertices.iter().map(|v| Vec3::new(-v.x, v.y, v.z)).collect(),
            self.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect(),
        )
    }

    fn pseudo_normal(&self, face: usize, feature: Feature) -> Vec3 {
        let t = self.triangles[face];
        match feature {
            Feature::Face => self.face_normals[face],
            Feature::Edge(k) => {
                let key = edge_key(t[k as usize], t[(k as usize + 1) % 3]);
                self.edge_normals[&key]
            }
            Feature::Vertex(k) => self.vertex_normals[t[k as usize]],
        }
    }

    fn query_component(&self, c: &Component, p: &Vec3) -> Option<SurfaceQuery> {
        let hit = c.bvh.closest_point(p)?;
        let face = c.faces[hit.triangle];
        let pn = self.pseudo_normal(face, hit.feature);
        let diff = p - hit.point;
        let dist = hit.dist_sq.sqrt();
        let inside = diff.dot(&pn) < 0.0;
        let normal = match diff.try_normalize(1e-12) {
            Some(d) if inside => -d,
            Some(d) => d,
            None => pn,
        };
        Some(SurfaceQuery { distance: if inside { -dist } else { dist }, point: hit.point, normal })
    }

    /// Signed distance to the union of all shells.
    pub fn query(&self, p: &Vec3) -> Option<SurfaceQuery> {
        let mut best: Option<SurfaceQuery> = None;
        for c in &self.components {
            if let Some(b) = &best {
                // Outside a shell's bounds the shell cannot beat a
                // non-negative best by more than the box distance.
                let bound = c.bounds.dist_sq(p).sqrt();
                if bound > b.distance.max(0.0) {
                    continue;
                }
            }
            if let Some(q) = self.query_component(c, p) {
                if best.is_none_or(|b| q.distance < b.distance) {
                    best = Some(q);
                }
            }
        }
        best
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.query(p).map_or(f64::INFINITY, |q| q.distance)
    }
}

fn connected_components(nv: usize, triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for t in triangles {
        for k in 1..3 {
            let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (f, t) in triangles.iter().enumerate() {
        let r = find(&mut parent, t[0]);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(f);
    }
    groups
}

/// Procedural closed (or, for `open_cylinder`, open) meshes with outward winding.
pub mod shapes {
    use std::collections::HashMap;
    use std::f64::consts::PI;

    use crate::pattern::Vec3;

    pub type RawMesh = (Vec<Vec3>, Vec<[usize; 3]>);

    /// Surface of revolution about +z. `profile` is `(radius, z)` from bottom
    /// to top; a zero radius at either end closes that end with a pole.
    pub fn lathe(profile: &[(f64, f64)], segments: usize) -> RawMesh {
        let mut vertices = Vec::new();
        let mut rings: Vec<Vec<usize>> = Vec::new();
        for &(r, z) in profile {
            if r == 0.0 {
                vertices.push(Vec3::new(0.0, 0.0, z));
                rings.push(vec![vertices.len() - 1; segments]);
            } else {
                let ring = (0..segments)
                    .map(|j| {
                        let a = 2.0 * PI * j as f64 / segments as f64;
                        vertices.push(Vec3::new(r * a.cos(), r * a.sin(), z));
                        vertices.len() - 1
                    })
                    .collect();
                rings.push(ring);
            }
        }
        let mut triangles = Vec::new();
        for i in 0..rings.len() - 1 {
            for j in 0..segments {
                let jn = (j + 1) % segments;
                let (a, b) = (rings[i][j], rings[i][jn]);
                let (c, d) = (rings[i + 1][jn], rings[i + 1][j]);
                if a != b {
                    triangles.push([a, b, c]);
                }
                if c != d {
                    triangles.push([a, c, d]);
                }
            }
        }
        (vertices, triangles)
    }

    /// Map a mesh built along +z onto the segment `a → b`.
    fn orient(mesh: RawMesh, a: Vec3, b: Vec3) -> RawMesh {
        let axis = (b - a).normalize();
        let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = helper.cross(&axis).normalize();
        let v = axis.cross(&u);
        let (vs, ts) = mesh;
        (vs.into_iter().map(|p| a + u * p.x + v * p.y + axis * p.z).collect(), ts)
    }

    /// Closed cylinder from `a` to `b`.
    pub fn cylinder(a: Vec3, b: Vec3, radius: f64, segments: usize) -> RawMesh {
        let h = (b - a).norm();
        orient(lathe(&[(0.0, 0.0), (radius, 0.0), (radius, h), (0.0, h)], segments), a, b)
    }

    /// Cylinder wall without caps, split into `rows` bands.
    pub fn open_cylinder(a: Vec3, b: Vec3, radius: f64, segments: usize, rows: usize) -> RawMesh {
        let h = (b - a).norm();
        let profile: Vec<(f64, f64)> = (0..=rows).map(|i| (radius, h * i as f64 / rows as f64)).collect();
        orient(lathe(&profile, segments), a, b)
    }

    /// Hemispherically capped cylinder between `a` and `b`.
    pub fn capsule(a: Vec3, b: Vec3, radius: f64, segments: usize, cap_rings: usize) -> RawMesh {
        let h = (b - a).norm();
        let mut profile = Vec::new();
        for i in 0..=cap_rings {
            let phi = -PI / 2.0 + PI / 2.0 * i as f64 / cap_rings as f64;
            profile.push((if i == 0 { 0.0 } else { radius * phi.cos() }, radius * phi.sin()));
        }
        for i in 0..=cap_rings {
            let phi = PI / 2.0 * i as f64 / cap_rings as f64;
            profile.push((if i == cap_rings { 0.0 } else { radius * phi.cos() }, h + radius * phi.sin()));
        }
        orient(lathe(&profile, segments), a, b)
    }

    /// Subdivided icosahedron projected onto a sphere.
    pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> RawMesh {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vs: Vec<Vec3> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
        .collect();
        let mut fs: Vec<[usize; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, vs: &mut Vec<Vec3>| {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    vs.push(((vs[a] + vs[b]) * 0.5).normalize());
                    vs.len() - 1
                })
            };
            let mut next = Vec::with_capacity(fs.len() * 4);
            for [a, b, c] in fs {
                let ab = midpoint(a, b, &mut vs);
                let bc = midpoint(b, c, &mut vs);
                let ca = midpoint(c, a, &mut vs);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            fs = next;
        }
        (vs.into_iter().map(|p| center + p * radius).collect(), fs)
    }

    /// Concatenate meshes into one index space.
    pub fn merge(parts: impl IntoIterator<Item = RawMesh>) -> RawMesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (vs, ts) in parts {
            let base = vertices.len();
            vertices.extend(vs);
            triangles.extend(ts.into_iter().map(|t| t.map(|i| i + base)));
        }
        (vertices, triangles)
    }

    /// Twelve-capsule standing figure, y up, facing +z, feet at y = 0,
    /// about 165 cm tall.
    pub fn mannequin() -> RawMesh {
        let p = Vec3::new;
        let parts: [(Vec3, Vec3, f64); 12] = [
            (p(0.0, 146.0, 0.0), p(0.0, 156.0, 0.0), 9.5),      // head
            (p(-5.0, 122.0, 0.0), p(5.0, 122.0, 0.0), 13.0),    // chest
            (p(0.0, 100.0, 0.0), p(0.0, 114.0, 0.0), 12.5),     // abdomen
            (p(-6.0, 92.0, 0.0), p(6.0, 92.0, 0.0), 13.0),      // pelvis
            (p(-21.0, 131.0, 0.0), p(-40.0, 114.0, 0.0), 4.5),  // upper arms
            (p(21.0, 131.0, 0.0), p(40.0, 114.0, 0.0), 4.5),
            (p(-40.0, 114.0, 0.0), p(-56.0, 100.0, 0.0), 3.8),  // forearms
            (p(40.0, 114.0, 0.0), p(56.0, 100.0, 0.0), 3.8),
            (p(-12.0, 88.0, 0.0), p(-12.0, 48.0, 0.0), 7.5),    // thighs
            (p(12.0, 88.0, 0.0), p(12.0, 48.0, 0.0), 7.5),
            (p(-12.0, 48.0, 0.0), p(-12.0, 7.0, 0.0), 5.5),     // shins
            (p(12.0, 48.0, 0.0), p(12.0, 7.0, 0.0), 5.5),
        ];
        merge(parts.iter().map(|&(a, b, r)| capsule(a, b, r, 32, 8)))
    }
}

#[cfg(test)]
mod tests {
    use super::shapes::*;
    use super::*;

    #[test]
    fn sphere_signed_distance() {
        let (v, t) = icosphere(Vec3::zeros(), 10.0, 4);
        let body = BodyModel::new(v, t);
        assert!(body.is_watertight());
        for (p, want) in [
            (Vec3::new(0.0, 0.0, 15.0), 5.0),
            (Vec3::new(0.0, 3.0, 0.0), -7.0),
            (Vec3::new(12.0, 0.0, 0.0), 2.0),
            (Vec3::new(-4.0, 4.0, -4.0), -(10.0 - 48f64.sqrt())),
        ] {
            let q = body.query(&p).unwrap();
            assert!((q.distance - want).abs() < 0.05, "{p:?}: {} vs {want}", q.distance);
            assert!((q.normal - p.normalize()).norm() < 0.05);
        }
    }

    #[test]
    fn sign_is_right_at_vertices_and_edges() {
        // Points straight out from each vertex and edge midpoint of a coarse sphere.
        let (v, t) = icosphere(Vec3::zeros(), 5.0, 1);
        let body = BodyModel::new(v.clone(), t.clone());
        for p in &v {
            assert!(body.signed_distance(&(p * 1.01)) > 0.0);
            assert!(body.signed_distance(&(p * 0.99)) < 0.0);
        }
        for tri in &t {
            let m = (v[tri[0]] + v[tri[1]]) * 0.5;
            assert!(body.signed_distance(&(m * 1.01)) > 0.0);
            assert!(body.signed_distance(&(m * 0.99)) < 0.0);
        }
    }

    #[test]
    fn shapes_are_closed_and_outward() {
        for (v, t) in [
            capsule(Vec3::zeros(), Vec3::new(1.0, 2.0, 3.0), 1.5, 16, 4),
            cylinder(Vec3::zeros(), Vec3::new(0.0, 10.0, 0.0), 3.0, 24),
            icosphere(Vec3::new(1.0, 1.0, 1.0), 2.0, 2),
        ] {
            let body = BodyModel::new(v.clone(), t);
            assert!(body.is_watertight());
            let c = v.iter().sum::<Vec3>() / v.len() as f64;
            assert!(body.signed_distance(&c) < 0.0);
            assert!(body.signed_distance(&(c + Vec3::new(50.0, 0.0, 0.0))) > 0.0);
        }
        let (v, t) = open_cylinder(Vec3::zeros(), Vec3::new(0.0, 10.0, 0.0), 3.0, 24, 4);
        assert!(!BodyModel::new(v, t).is_watertight());
    }

    #[test]
    fn union_of_shells() {
        let (v, t) = merge([
            icosphere(Vec3::zeros(), 5.0, 3),
            icosphere(Vec3::new(8.0, 0.0, 0.0), 5.0, 3),
        ]);
        let body = BodyModel::new(v, t);
        // Inside the first sphere, closer to the second sphere's outer surface.
        assert!(body.signed_distance(&Vec3::new(2.0, 0.0, 0.0)) < -2.5);
        assert!(body.signed_distance(&Vec3::new(4.0, 0.0, 0.0)) < 0.0);
        assert!(body.signed_distance(&Vec3::new(4.0, 6.0, 0.0)) > 0.0);
    }

    #[test]
    fn mannequin_proportions() {
        let (v, t) = mannequin();
        let body = BodyModel::new(v, t);
        let b = body.bounds();
        assert!(b.min.y > 0.0 && b.min.y < 3.0);
        assert!((b.max.y - 165.5).abs() < 0.1);
        assert!(body.signed_distance(&Vec3::new(0.0, 92.0, 0.0)) < -10.0);
        assert!(body.signed_distance(&Vec3::new(0.0, 92.0, 30.0)) > 0.0);
    }

    #[test]
    fn mirror_keeps_outward_winding() {
        let (v, t) = capsule(Vec3::new(1.0, 0.0, 0.0), Vec3::new(4.0, 3.0, 0.0), 1.0, 12, 3);
        let m = BodyModel::new(v, t).mirrored_x();
        assert!(m.is_watertight());
        assert!(m.signed_distance(&Vec3::new(-2.5, 1.5, 0.0)) < 0.0);
        assert!(m.signed_distance(&Vec3::new(2.5, 1.5, 0.0)) > 0.0);
    }
}
