//! Bounding volume hierarchy over a triangle soup: closest-point, ray and
//! box queries.

use crate::pattern::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self { min: Vec3::repeat(f64::INFINITY), max: Vec3::repeat(f64::NEG_INFINITY) }
    }

    pub fn of_points(pts: &[Vec3]) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&o.min), max: self.max.sup(&o.max) }
    }

    pub fn inflate(&self, by: f64) -> Aabb {
        Aabb { min: self.min.add_scalar(-by), max: self.max.add_scalar(by) }
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= o.max[k] && o.min[k] <= self.max[k])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Squared distance from `p` to the box (0 inside).
    pub fn dist_sq(&self, p: &Vec3) -> f64 {
        (0..3)
            .map(|k| {
                let d = (self.min[k] - p[k]).max(0.0).max(p[k] - self.max[k]);
                d * d
            })
            .sum()
    }

    /// Entry parameter of the ray into the box within `[0, tmax]`.
    fn ray_entry(&self, o: &Vec3, inv_d: &Vec3, tmax: f64) -> Option<f64> {
        let (mut t0, mut t1) = (0.0f64, tmax);
        for k in 0..3 {
            let a = (self.min[k] - o[k]) * inv_d[k];
            let b = (self.max[k] - o[k]) * inv_d[k];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // NaN from 0 * inf means the ray lies in the slab plane; keep going.
            if !lo.is_nan() {
                t0 = t0.max(lo);
            }
            if !hi.is_nan() {
                t1 = t1.min(hi);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

/// Which part of a triangle a closest point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Face,
    /// Edge between local corners `k` and `(k + 1) % 3`.
    Edge(u8),
    Vertex(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub triangle: usize,
    pub point: Vec3,
    pub dist_sq: f64,
    pub feature: Feature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub triangle: usize,
    pub t: f64,
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    // Leaf: first index into `order`; inner: index of the right child (left is next).
    start: usize,
    count: usize,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    tris: Vec<[Vec3; 3]>,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub fn new(tris: Vec<[Vec3; 3]>) -> Self {
        let mut bvh = Bvh { order: (0..tris.len()).collect(), tris, nodes: Vec::new() };
        if !bvh.tris.is_empty() {
            let centroids: Vec<Vec3> = bvh.tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
            let n = bvh.tris.len();
            bvh.build(&centroids, 0, n);
        }
        bvh
    }

    pub fn from_mesh(vertices: &[Vec3], triangles: &[[usize; 3]]) -> Self {
        Self::new(triangles.iter().map(|t| t.map(|i| vertices[i])).collect())
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    pub fn triangle(&self, i: usize) -> &[Vec3; 3] {
        &self.tris[i]
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map_or_else(Aabb::empty, |n| n.bounds)
    }

    fn build(&mut self, centroids: &[Vec3], start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &i in &self.order[start..end] {
            for p in &self.tris[i] {
                bounds.grow(p);
            }
            cbounds.grow(&centroids[i]);
        }
        let id = self.nodes.len();
        self.nodes.push(Node { bounds, start, count: end - start });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let ext = cbounds.max - cbounds.min;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        if ext[axis] <= 0.0 {
            return id;
        }
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        self.build(centroids, start, mid);
        let right = self.build(centroids, mid, end);
        self.nodes[id].start = right;
        self.nodes[id].count = 0;
        id
    }

    /// Nearest point on any triangle. Ties keep the lowest triangle index.
    pub fn closest_point(&self, p: &Vec3) -> Option<ClosestPoint> {
        let mut best: Option<ClosestPoint> = None;
        self.closest_rec(0, p, &mut best);
        best
    }

    fn closest_rec(&self, id: usize, p: &Vec3, best: &mut Option<ClosestPoint>) {
        let Some(node) = self.nodes.get(id) else { return };
        if let Some(b) = best {
            if node.bounds.dist_sq(p) > b.dist_sq {
                return;
            }
        }
        if node.count > 0 {
            for &i in &self.order[node.start..node.start + node.count] {
                let (q, feature) = closest_on_triangle(p, &self.tris[i]);
                let d = (q - p).norm_squared();
                let better = match best {
                    None => true,
                    Some(b) => d < b.dist_sq || (d == b.dist_sq && i < b.triangle),
                };
                if better {
                    *best = Some(ClosestPoint { triangle: i, point: q, dist_sq: d, feature });
                }
            }
            return;
        }
        let (l, r) = (id + 1, node.start);
        let (dl, dr) = (self.nodes[l].bounds.dist_sq(p), self.nodes[r].bounds.dist_sq(p));
        if dl <= dr {
            self.closest_rec(l, p, best);
            self.closest_rec(r, p, best);
        } else {
            self.closest_rec(r, p, best);
            self.closest_rec(l, p, best);
        }
    }

    /// First hit along `origin + t·dir` for `t` in `(0, tmax]`, ignoring the
    /// triangle `skip`.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, tmax: f64, skip: Option<usize>) -> Option<RayHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = dir.map(|c| 1.0 / c);
        let mut best: Option<RayHit> = None;
        let mut limit = tmax;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bounds.ray_entry(origin, &inv, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for &i in &self.order[node.start..node.start + node.count] {
                    if Some(i) == skip {
                        continue;
                    }
                    if let Some(t) = ray_triangle(origin, dir, &self.tris[i]) {
                        let better = t < limit || (t == limit && best.is_some_and(|b| i < b.triangle));
                        if better {
                            limit = t;
                            best = Some(RayHit { triangle: i, t });
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(id + 1);
            }
        }
        best
    }

    /// Indices of triangles whose bounds overlap `b`, ascending.
    pub fn query_aabb(&self, b: &Aabb) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !node.bounds.overlaps(b) {
                continue;
            }
            if node.count > 0 {
                for &i in &self.order[node.start..node.start + node.count] {
                    if Aabb::of_points(&self.tris[i]).overlaps(b) {
                        out.push(i);
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(id + 1);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Möller–Trumbore, two-sided. Returns `t > 0`.
pub fn ray_triangle(o: &Vec3, d: &Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pv = d.cross(&e2);
    let det = e1.dot(&pv);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - tri[0];
    let u = s.dot(&pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 0.0).then_some(t)
}

/// Closest point on a triangle and the feature it lies on (Voronoi-region walk).
pub fn closest_on_triangle(p: &Vec3, t: &[Vec3; 3]) -> (Vec3, Feature) {
    let [a, b, c] = *t;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, Feature::Vertex(0));
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, Feature::Vertex(1));
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, Feature::Edge(0));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, Feature::Vertex(2));
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, Feature::Edge(2));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, Feature::Edge(1));
    }
    let denom = va + vb + vc;
    if denom.abs() < f64::MIN_POSITIVE {
        // Degenerate triangle: fall back to the nearest corner.
        let q = [a, b, c]
            .into_iter()
            .enumerate()
            .min_by(|x, y| (x.1 - p).norm_squared().total_cmp(&(y.1 - p).norm_squared()))
            .unwrap();
        return (q.1, Feature::Vertex(q.0 as u8));
    }
    let v = vb / denom;
    let w = vc / denom;
    (a + ab * v + ac * w, Feature::Face)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_soup(n: usize, seed: u64) -> Vec<[Vec3; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = |rng: &mut ChaCha8Rng| {
            Vec3::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0))
        };
        (0..n)
            .map(|_| {
                let a = pt(&mut rng);
                let off = |rng: &mut ChaCha8Rng| a + Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                [a, off(&mut rng), off(&mut rng)]
            })
            .collect()
    }

    fn brute_closest(tris: &[[Vec3; 3]], p: &Vec3) -> f64 {
        tris.iter().map(|t| (closest_on_triangle(p, t).0 - p).norm_squared()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn closest_point_matches_brute_force() {
        let tris = random_soup(300, 1);
        let bvh = Bvh::new(tris.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = Vec3::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
            let got = bvh.closest_point(&p).unwrap();
            assert_eq!(got.dist_sq, brute_closest(&tris, &p));
        }
    }

    #[test]
    fn closest_on_triangle_regions() {
        let t = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let (q, f) = closest_on_triangle(&Vec3::new(0.2, 0.2, 3.0), &t);
        assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert_eq!(f, Feature::Face);
        assert_eq!(closest_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &t).1, Feature::Vertex(0));
        assert_eq!(closest_on_triangle(&Vec3::new(0.5, -1.0, 0.0), &t), (Vec3::new(0.5, 0.0, 0.0), Feature::Edge(0)));
        assert_eq!(closest_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &t), (Vec3::new(0.5, 0.5, 0.0), Feature::Edge(1)));
        assert_eq!(closest_on_triangle(&Vec3::new(-1.0, 0.5, 0.0), &t), (Vec3::new(0.0, 0.5, 0.0), Feature::Edge(2)));
    }

    #[test]
    fn raycast_matches_brute_force() {
        let tris = random_soup(300, 3);
        let bvh = Bvh::new(tris.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 0..300 {
            let o = Vec3::new(rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0));
            let d = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalize();
            let skip = (k % 3 == 0).then_some(k % 300);
            let brute = tris
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .filter_map(|(i, t)| ray_triangle(&o, &d, t).map(|t| (t, i)))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let got = bvh.raycast(&o, &d, f64::INFINITY, skip).map(|h| (h.t, h.triangle));
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn axis_aligned_rays_hit() {
        let t = [Vec3::new(-1.0, -1.0, 5.0), Vec3::new(1.0, -1.0, 5.0), Vec3::new(0.0, 1.0, 5.0)];
        let bvh = Bvh::new(vec![t]);
        let hit = bvh.raycast(&Vec3::zeros(), &Vec3::z(), f64::INFINITY, None).unwrap();
        assert_eq!(hit.t, 5.0);
        assert!(bvh.raycast(&Vec3::zeros(), &Vec3::z(), 4.0, None).is_none());
        assert!(bvh.raycast(&Vec3::zeros(), &-Vec3::z(), f64::INFINITY, None).is_none());
    }

    #[test]
    fn box_query_matches_brute_force() {
        let tris = random_soup(200, 5);
        let bvh = Bvh::new(tris.clone());
        let q = Aabb { min: Vec3::new(-3.0, -3.0, -3.0), max: Vec3::new(4.0, 2.0, 5.0) };
        let brute: Vec<usize> = (0..tris.len()).filter(|&i| Aabb::of_points(&tris[i]).overlaps(&q)).collect();
        assert_eq!(bvh.query_aabb(&q), brute);
        assert!(!brute.is_empty());
    }
}
