//! Scan imitation: faces that a scanner standing at the box walls could not
//! see are removed, leaving the holes a real 3D scan would have.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::BodyModel;
use crate::bvh::{Aabb, Bvh};
use crate::mesh::GarmentMesh;
use crate::pattern::Vec3;

/// Gap between the scene bounds and the scanner walls, in cm.
pub const BOX_MARGIN: f64 = 2.0;
/// Ray origins are lifted this far off the source face.
pub const ORIGIN_OFFSET: f64 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum ScanError {
    #[error("rays_per_face must be at least 1")]
    NoRays,
    #[error("visible_fraction_threshold must be in (0, 1], got {0}")]
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub rays_per_face: u32,
    pub visible_fraction_threshold: f64,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { rays_per_face: 32, visible_fraction_threshold: 0.10, seed: 0 }
    }
}

impl ScanConfig {
    pub fn check(&self) -> Result<(), ScanError> {
        if self.rays_per_face == 0 {
            return Err(ScanError::NoRays);
        }
        let t = self.visible_fraction_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(ScanError::Threshold(t));
        }
        Ok(())
    }
}

/// Axis-aligned scanner box. The four side faces see; floor and ceiling
/// absorb rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl ScanBox {
    pub fn around(bounds: &Aabb, margin: f64) -> Self {
        let b = bounds.inflate(margin);
        Self { min: b.min, max: b.max }
    }

    /// Exit distance of a ray starting inside the box, and whether it leaves
    /// through a side wall.
    pub fn exit(&self, o: &Vec3, d: &Vec3) -> (f64, bool) {
        let mut best = (f64::INFINITY, false);
        for axis in 0..3 {
            let t = if d[axis] > 0.0 {
                (self.max[axis] - o[axis]) / d[axis]
            } else if d[axis] < 0.0 {
                (self.min[axis] - o[axis]) / d[axis]
            } else {
                continue;
            };
            // On an edge the floor or ceiling wins.
            if t < best.0 || (t == best.0 && axis == 1) {
                best = (t, axis != 1);
            }
        }
        best
    }
}

/// Garment and body prepared for ray queries.
pub struct ScanScene<'a> {
    garment: &'a GarmentMesh,
    garment_bvh: Bvh,
    body: Option<&'a BodyModel>,
    pub scan_box: ScanBox,
}

impl<'a> ScanScene<'a> {
    pub fn new(garment: &'a GarmentMesh, body: Option<&'a BodyModel>) -> Self {
        let garment_bvh = Bvh::from_mesh(&garment.vertices, &garment.triangles);
        let mut bounds = Aabb::of_points(&garment.vertices);
        if let Some(b) = body {
            bounds = bounds.merge(&b.bounds());
        }
        if garment.vertices.is_empty() && body.is_none() {
            bounds = Aabb::of_points(&[Vec3::zeros()]);
        }
        Self { garment, garment_bvh, body, scan_box: ScanBox::around(&bounds, BOX_MARGIN) }
    }

    /// Whether a ray from `o` reaches a side wall before anything else.
    pub fn ray_visible(&self, o: &Vec3, d: &Vec3, skip: Option<usize>) -> bool {
        let (t_exit, wall) = self.scan_box.exit(o, d);
        if !wall {
            return false;
        }
        if self.garment_bvh.raycast(o, d, t_exit, skip).is_some() {
            return false;
        }
        match self.body {
            Some(b) => b.bvh().raycast(o, d, t_exit, None).is_none(),
            None => true,
        }
    }

    /// Fraction of front-hemisphere rays from the centroid of `face` that
    /// reach a side wall.
    pub fn face_visibility(&self, face: usize, cfg: &ScanConfig) -> f64 {
        let [a, b, c] = self.garment.triangle(face);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if !(len > 0.0) || !len.is_finite() || cfg.rays_per_face == 0 {
            return 0.0;
        }
        let n = n / len;
        let origin = (a + b + c) / 3.0 + n * ORIGIN_OFFSET;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(face as u64);
        let mut visible = 0u32;
        for _ in 0..cfg.rays_per_face {
            let d = hemisphere_direction(&mut rng, &n);
            if self.ray_visible(&origin, &d, Some(face)) {
                visible += 1;
            }
        }
        visible as f64 / cfg.rays_per_face as f64
    }

    pub fn visibilities(&self, cfg: &ScanConfig) -> Vec<f64> {
        (0..self.garment.face_count()).into_par_iter().map(|f| self.face_visibility(f, cfg)).collect()
    }
}

/// Uniform direction on the unit sphere, flipped into the hemisphere of `n`.
pub fn hemisphere_direction<R: Rng>(rng: &mut R, n: &Vec3) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    let d = Vec3::new(r * phi.cos(), r * phi.sin(), z);
    if d.dot(n) < 0.0 {
        -d
    } else {
        d
    }
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub mesh: GarmentMesh,
    /// Visible fraction per input face.
    pub visibility: Vec<f64>,
    /// Input faces that were kept.
    pub kept_faces: Vec<bool>,
    /// For each output vertex, its index in the input mesh.
    pub vertex_source: Vec<usize>,
}

impl ScanResult {
    pub fn removed_faces(&self) -> Vec<usize> {
        self.kept_faces.iter().enumerate().filter(|(_, &k)| !k).map(|(i, _)| i).collect()
    }
}

/// Remove faces seen from less than the configured fraction of rays, then
/// drop vertices with no remaining faces. Labels follow their vertices.
pub fn scan_detailed(g: &GarmentMesh, body: Option<&BodyModel>, cfg: &ScanConfig) -> Result<ScanResult, ScanError> {
    cfg.check()?;
    let scene = ScanScene::new(g, body);
    let visibility = scene.visibilities(cfg);
    let kept_faces: Vec<bool> = visibility.iter().map(|&v| v >= cfg.visible_fraction_threshold).collect();
    let (mesh, vertex_source) = g.retain_faces(&kept_faces);
    Ok(ScanResult { mesh, visibility, kept_faces, vertex_source })
}

pub fn scan_imitate(g: &GarmentMesh, body: Option<&BodyModel>, cfg: &ScanConfig) -> Result<GarmentMesh, ScanError> {
    scan_detailed(g, body, cfg).map(|r| r.mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::shapes::{cylinder, open_cylinder};

    fn tri_mesh() -> GarmentMesh {
        let v = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        GarmentMesh::uniform(v, vec![[0, 2, 1]], "t")
    }

    #[test]
    fn exit_classifies_walls() {
        let b = ScanBox { min: Vec3::new(-1.0, -1.0, -1.0), max: Vec3::new(1.0, 1.0, 1.0) };
        assert_eq!(b.exit(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0)), (1.0, true));
        assert_eq!(b.exit(&Vec3::zeros(), &Vec3::new(0.0, -1.0, 0.0)), (1.0, false));
        assert_eq!(b.exit(&Vec3::zeros(), &Vec3::new(0.0, 0.0, -1.0)), (1.0, true));
        assert!(!b.exit(&Vec3::zeros(), &Vec3::new(1.0, 1.0, 0.0).normalize()).1);
    }

    #[test]
    fn horizontal_face_sees_walls_sideways() {
        // Normal points up: the hemisphere mixes walls and ceiling.
        let g = tri_mesh();
        let f = ScanScene::new(&g, None).face_visibility(0, &ScanConfig { rays_per_face: 2000, ..Default::default() });
        assert!(f > 0.0 && f < 1.0, "{f}");
    }

    #[test]
    fn degenerate_face_is_invisible() {
        let v = vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        let g = GarmentMesh::uniform(v, vec![[0, 1, 2]], "t");
        assert_eq!(ScanScene::new(&g, None).face_visibility(0, &ScanConfig::default()), 0.0);
    }

    #[test]
    fn enclosed_cylinder_is_invisible() {
        let (v, t) = open_cylinder(Vec3::new(0.0, 5.0, 0.0), Vec3::new(0.0, 15.0, 0.0), 5.0, 24, 4);
        let g = GarmentMesh::uniform(v, t, "inner");
        let (bv, bt) = cylinder(Vec3::zeros(), Vec3::new(0.0, 20.0, 0.0), 8.0, 32);
        let body = BodyModel::new(bv, bt);
        let r = scan_detailed(&g, Some(&body), &ScanConfig::default()).unwrap();
        assert!(r.visibility.iter().all(|&v| v == 0.0));
        assert!(r.mesh.is_empty());
    }

    #[test]
    fn same_seed_same_result() {
        let (v, t) = open_cylinder(Vec3::zeros(), Vec3::new(0.0, 10.0, 0.0), 5.0, 16, 3);
        let g = GarmentMesh::uniform(v, t, "c");
        let cfg = ScanConfig { seed: 7, ..Default::default() };
        let a = scan_detailed(&g, None, &cfg).unwrap();
        let b = scan_detailed(&g, None, &cfg).unwrap();
        assert_eq!(a.visibility, b.visibility);
        let c = scan_detailed(&g, None, &ScanConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.visibility, c.visibility);
    }

    #[test]
    fn bad_config() {
        let g = tri_mesh();
        assert_eq!(scan_imitate(&g, None, &ScanConfig { rays_per_face: 0, ..Default::default() }).unwrap_err(), ScanError::NoRays);
        let cfg = ScanConfig { visible_fraction_threshold: 0.0, ..Default::default() };
        assert!(matches!(scan_imitate(&g, None, &cfg), Err(ScanError::Threshold(_))));
    }
}
