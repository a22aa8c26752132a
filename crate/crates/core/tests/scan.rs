mod common;

use common::{double_cylinder, rng};
use patternforge_core::body::shapes::{cylinder, open_cylinder};
use patternforge_core::pattern::Vec3;
use patternforge_core::scan::{ScanScene, BOX_MARGIN};
use patternforge_core::{scan_detailed, BodyModel, GarmentMesh, ScanConfig, ScanResult};
use proptest::prelude::*;
use rand::Rng;

/// Uniform direction on the hemisphere around `n`, by rejection from the cube.
fn oracle_direction<R: Rng>(r: &mut R, n: &Vec3) -> Vec3 {
    loop {
        let d = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let len = d.norm();
        if len > 1e-6 && len <= 1.0 {
            let d = d / len;
            return if d.dot(n) < 0.0 { -d } else { d };
        }
    }
}

/// Axis through which a ray from `o` leaves the box `[lo, hi]`.
fn exit_axis(o: &Vec3, d: &Vec3, lo: &Vec3, hi: &Vec3) -> usize {
    let mut best = (f64::INFINITY, 0);
    for k in 0..3 {
        let t = if d[k] > 0.0 { (hi[k] - o[k]) / d[k] } else if d[k] < 0.0 { (lo[k] - o[k]) / d[k] } else { continue };
        if t < best.0 {
            best = (t, k);
        }
    }
    best.1
}

#[test]
fn isolated_triangle_sees_at_least_half() {
    // Vertical triangle facing +z.
    let tri = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(6.0, 0.0, 0.0), Vec3::new(3.0, 5.0, 0.0)];
    let g = GarmentMesh::uniform(tri.clone(), vec![[0, 1, 2]], "t");
    let n = Vec3::new(0.0, 0.0, 1.0);
    let centroid = (tri[0] + tri[1] + tri[2]) / 3.0;
    let lo = Vec3::new(0.0, 0.0, 0.0).add_scalar(-BOX_MARGIN);
    let hi = Vec3::new(6.0, 5.0, 0.0).add_scalar(BOX_MARGIN);
    let mut r = rng(9);
    let rays = 100_000;
    let side = (0..rays).filter(|_| exit_axis(&centroid, &oracle_direction(&mut r, &n), &lo, &hi) != 1).count();
    let oracle = side as f64 / rays as f64;

    let scene = ScanScene::new(&g, None);
    let got = scene.face_visibility(0, &ScanConfig { rays_per_face: 20_000, ..Default::default() });
    assert!(oracle >= 0.5 && got >= 0.5, "oracle {oracle}, got {got}");
    assert!((got - oracle).abs() < 0.02, "oracle {oracle}, got {got}");
}

#[test]
fn face_against_the_body_is_hidden() {
    // Face at the origin looking at a wide slab 1 cm away.
    let tri = vec![Vec3::new(-0.5, -0.3, 0.0), Vec3::new(0.5, -0.3, 0.0), Vec3::new(0.0, 0.5, 0.0)];
    let g = GarmentMesh::uniform(tri, vec![[0, 1, 2]], "t");
    let (v, t) = cylinder(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 5.0), 200.0, 64);
    let body = BodyModel::new(v, t);
    let cfg = ScanConfig { rays_per_face: 4096, ..Default::default() };
    let got = ScanScene::new(&g, Some(&body)).face_visibility(0, &cfg);
    // Rays escape only below the slab's rim: polar angle beyond atan(R / 1).
    let analytic = (200.0f64).atan().cos();
    assert!(got < cfg.visible_fraction_threshold, "{got}");
    assert!((got - analytic).abs() < 0.01, "{got} vs {analytic}");
}

fn skirt() -> GarmentMesh {
    let (v, t) = open_cylinder(Vec3::zeros(), Vec3::new(0.0, 30.0, 0.0), 12.0, 48, 12);
    GarmentMesh::uniform(v, t, "skirt")
}

#[test]
fn open_skirt_without_body_survives() {
    let g = skirt();
    let r = scan_detailed(&g, None, &ScanConfig::default()).unwrap();
    let kept = r.mesh.face_count() as f64 / g.face_count() as f64;
    assert!(kept >= 0.99, "{kept}");
}

fn fixture_suite() -> Vec<(GarmentMesh, Option<BodyModel>)> {
    let (bv, bt) = cylinder(Vec3::new(0.0, -10.0, 0.0), Vec3::new(0.0, 50.0, 0.0), 10.0, 48);
    vec![(double_cylinder().0, None), (skirt(), None), (skirt(), Some(BodyModel::new(bv, bt)))]
}

#[test]
fn more_rays_barely_change_the_removed_set() {
    for (g, body) in fixture_suite() {
        let coarse = scan_detailed(&g, body.as_ref(), &ScanConfig::default()).unwrap();
        let fine = scan_detailed(&g, body.as_ref(), &ScanConfig { rays_per_face: 512, ..Default::default() }).unwrap();
        let changed = coarse.kept_faces.iter().zip(&fine.kept_faces).filter(|(a, b)| a != b).count();
        assert!((changed as f64) < 0.02 * g.face_count() as f64, "{changed} of {}", g.face_count());
    }
}

fn check_output(g: &GarmentMesh, r: &ScanResult) -> Result<(), TestCaseError> {
    let n = r.mesh.vertex_count();
    let mut used = vec![false; n];
    for t in &r.mesh.triangles {
        for &i in t {
            prop_assert!(i < n);
            used[i] = true;
        }
    }
    prop_assert!(used.iter().all(|&u| u), "orphan vertex");
    prop_assert!(r.vertex_source.windows(2).all(|w| w[0] < w[1]));
    for (i, &src) in r.vertex_source.iter().enumerate() {
        prop_assert_eq!(&r.mesh.labels[i], &g.labels[src]);
        prop_assert_eq!(r.mesh.vertices[i], g.vertices[src]);
    }
    prop_assert_eq!(r.mesh.face_count(), r.kept_faces.iter().filter(|&&k| k).count());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn removal_grows_with_threshold(seed in any::<u64>(), a in 0.01..1.0f64, b in 0.01..1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut g = skirt();
        // Label rows so the subsequence check is meaningful.
        for (i, l) in g.labels.iter_mut().enumerate() {
            *l = format!("row{}", i / 48);
        }
        let (bv, bt) = cylinder(Vec3::new(0.0, -5.0, 0.0), Vec3::new(0.0, 20.0, 0.0), 11.0, 32);
        let body = BodyModel::new(bv, bt);
        let at = |t: f64| scan_detailed(&g, Some(&body), &ScanConfig { visible_fraction_threshold: t, seed, rays_per_face: 16 }).unwrap();
        let (rl, rh) = (at(lo), at(hi));
        prop_assert!(rl.kept_faces.iter().zip(&rh.kept_faces).all(|(l, h)| *l || !*h));
        check_output(&g, &rl)?;
        check_output(&g, &rh)?;
        prop_assert_eq!(at(lo).kept_faces, rl.kept_faces);
    }
}
