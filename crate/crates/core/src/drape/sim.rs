use std::collections::HashMap;

use super::quality::quality_check;
use super::{DrapeError, SimConfig, SimReport, StitchPairs};
use crate::body::BodyModel;
use crate::mesh::GarmentMesh;
use crate::pattern::Vec3;

#[derive(Debug, Clone, Copy)]
struct Link {
    i: usize,
    j: usize,
    rest: f64,
}

/// Result of advancing the solver by one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub mean_speed: f64,
    pub finite: bool,
}

/// Position-based cloth solver. Rest lengths come from the initial vertex
/// positions, so an assembled (flat, rigidly placed) garment starts at rest.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    cfg: SimConfig,
    body: &'a BodyModel,
    x: Vec<Vec3>,
    v: Vec<Vec3>,
    prev: Vec<Vec3>,
    stretch: Vec<Link>,
    bend: Vec<Link>,
    stitches: Vec<Link>,
    // Last exact body query per vertex: position and signed distance. The
    // distance field is 1-Lipschitz, so a vertex that has moved less than
    // (distance − offset) since its anchor cannot be in contact.
    anchor: Vec<(Vec3, f64)>,
    // Total normal correction applied by the body this frame.
    pushed: Vec<f64>,
    frame: u32,
}

fn per_iteration(k: f64, iterations: u32) -> f64 {
    1.0 - (1.0 - k).powf(1.0 / iterations as f64)
}

fn project(x: &mut [Vec3], l: &Link, rest: f64, k: f64) {
    let d = x[l.j] - x[l.i];
    let len = d.norm();
    let c = len - rest;
    if c == 0.0 || len < 1e-12 {
        return;
    }
    let corr = d * (0.5 * k * c / len);
    x[l.i] += corr;
    x[l.j] -= corr;
}

impl<'a> Solver<'a> {
    pub fn new(g: &GarmentMesh, pairs: &StitchPairs, body: &'a BodyModel, cfg: &SimConfig) -> Result<Self, DrapeError> {
        cfg.check()?;
        if g.labels.len() != g.vertex_count() {
            return Err(DrapeError::LabelCount(g.labels.len(), g.vertex_count()));
        }
        let x = g.vertices.clone();
        let link = |i: usize, j: usize| Link { i, j, rest: (x[j] - x[i]).norm() };

        // Edge → opposite corners, in a deterministic order.
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for t in &g.triangles {
            for k in 0..3 {
                let (a, b, o) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push(o);
            }
        }
        let mut keys: Vec<(usize, usize)> = edges.keys().copied().collect();
        keys.sort_unstable();
        let stretch = keys.iter().map(|&(a, b)| link(a, b)).collect();
        let bend = keys
            .iter()
            .filter_map(|e| match edges[e].as_slice() {
                [o1, o2] => Some(link(*o1, *o2)),
                _ => None,
            })
            .collect();
        let stitches = pairs.iter().map(|p| link(p.a, p.b)).collect();
        let n = x.len();
        Ok(Self {
            cfg: cfg.clone(),
            body,
            v: vec![Vec3::zeros(); n],
            prev: x.clone(),
            x,
            stretch,
            bend,
            stitches,
            anchor: vec![(Vec3::zeros(), f64::NEG_INFINITY); n],
            pushed: vec![0.0; n],
            frame: 0,
        })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.x
    }

    pub fn velocities(&self) -> &[Vec3] {
        &self.v
    }

    pub fn set_velocities(&mut self, v: Vec<Vec3>) {
        assert_eq!(v.len(), self.x.len());
        self.v = v;
    }

    pub fn frame(&self) -> u32 {
        self.frame
    }

    /// Unit-mass kinetic energy.
    pub fn kinetic_energy(&self) -> f64 {
        self.v.iter().map(|v| 0.5 * v.norm_squared()).sum()
    }

    fn stitch_rest_scale(&self) -> f64 {
        let anneal = self.cfg.anneal_frames() as f64;
        (1.0 - self.frame as f64 / anneal).max(0.0)
    }

    fn collide(&mut self, i: usize) {
        let offset = self.cfg.collision_offset;
        let (a, sd) = self.anchor[i];
        if sd - (self.x[i] - a).norm() > offset {
            return;
        }
        let Some(q) = self.body.query(&self.x[i]) else {
            self.anchor[i] = (self.x[i], f64::INFINITY);
            return;
        };
        if q.distance < offset {
            let n = q.normal;
            let mut x = q.point + n * offset;
            self.pushed[i] += offset - q.distance;
            // Coulomb friction on this frame's tangential motion: stick while
            // it is within mu times the normal correction, otherwise slide
            // with the excess.
            let mu = self.cfg.friction;
            if mu > 0.0 {
                let dx = x - self.prev[i];
                let tangential = dx - n * n.dot(&dx);
                let slide = tangential.norm();
                let limit = mu * self.pushed[i];
                if slide <= limit {
                    x -= tangential;
                } else if slide > 0.0 {
                    x -= tangential * (limit / slide);
                }
            }
            self.x[i] = x;
            self.anchor[i] = (self.x[i], f64::NEG_INFINITY);
        } else {
            self.anchor[i] = (self.x[i], q.distance);
        }
    }

    pub fn step(&mut self) -> StepOutcome {
        let dt = self.cfg.time_step;
        // Gravity waits for the seams: an open garment would fall past the
        // body before its stitches close.
        let gravity = if self.annealed() { self.cfg.gravity } else { 0.0 };
        let g = Vec3::new(0.0, -gravity, 0.0);
        let keep = 1.0 - self.cfg.damping;
        for i in 0..self.x.len() {
            self.v[i] *= keep;
            self.prev[i] = self.x[i];
            let delta = self.v[i] * dt + g * (dt * dt);
            if delta != Vec3::zeros() {
                self.x[i] += delta;
            }
            self.pushed[i] = 0.0;
        }
        self.frame += 1;

        let iters = self.cfg.solver_iterations;
        let ks = per_iteration(self.cfg.stretch_stiffness, iters);
        let kb = per_iteration(self.cfg.bend_stiffness, iters);
        let kt = per_iteration(self.cfg.stitch_stiffness, iters);
        let scale = self.stitch_rest_scale();
        for _ in 0..iters {
            for l in &self.stretch {
                project(&mut self.x, l, l.rest, ks);
            }
            if kb > 0.0 {
                for l in &self.bend {
                    project(&mut self.x, l, l.rest, kb);
                }
            }
            for l in &self.stitches {
                project(&mut self.x, l, l.rest * scale, kt);
            }
            for i in 0..self.x.len() {
                self.collide(i);
            }
        }

        let inv_dt = 1.0 / dt;
        let mut total = 0.0;
        let mut finite = true;
        for i in 0..self.x.len() {
            let v = (self.x[i] - self.prev[i]) * inv_dt;
            finite &= v.iter().all(|c| c.is_finite()) && self.x[i].iter().all(|c| c.is_finite());
            total += v.norm();
            self.v[i] = v;
        }
        let n = self.x.len().max(1) as f64;
        StepOutcome { mean_speed: total / n, finite }
    }

    /// Whether stitches have finished closing.
    pub fn annealed(&self) -> bool {
        self.stitches.is_empty() || self.frame >= self.cfg.anneal_frames()
    }
}

/// Drape `g` onto `body`. Stops when the mean vertex speed drops below the
/// rest threshold (after stitches have closed) or after `max_frames`.
pub fn simulate(
    g: &GarmentMesh,
    pairs: &StitchPairs,
    body: &BodyModel,
    cfg: &SimConfig,
) -> Result<(GarmentMesh, SimReport), DrapeError> {
    let mut solver = Solver::new(g, pairs, body, cfg)?;
    let mut report = SimReport::default();
    while solver.frame() < cfg.max_frames {
        let out = solver.step();
        if !out.finite {
            report.non_finite = true;
            break;
        }
        if solver.annealed() && out.mean_speed < cfg.rest_threshold {
            report.converged = true;
            break;
        }
    }
    report.frames_run = solver.frame();
    let mesh = GarmentMesh { vertices: solver.x, triangles: g.triangles.clone(), labels: g.labels.clone() };
    if report.non_finite {
        report.failed = true;
        log::warn!("simulation diverged at frame {}", report.frames_run);
        return Ok((mesh, report));
    }
    let q = quality_check(&mesh, body, cfg.collision_offset, pairs);
    report.body_penetration_count = q.body_penetration_count;
    report.self_intersection_count = q.self_intersection_count;
    report.failed = q.failed();
    Ok((mesh, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::shapes::icosphere;
    use crate::drape::assemble_garment;
    use crate::pattern::{Panel, PatternSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn far_sphere() -> BodyModel {
        let (v, t) = icosphere(Vec3::new(0.0, -100.0, 0.0), 5.0, 2);
        BodyModel::new(v, t)
    }

    fn square(side: f64, res: f64) -> GarmentMesh {
        let p = PatternSpec {
            panels: vec![Panel::polygon("sq", &[[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]])
                .with_placement(Vec3::new(-side / 2.0, 0.0, side / 2.0), Vec3::new(-90.0, 0.0, 0.0))],
            stitches: vec![],
        };
        assemble_garment(&p, res).unwrap().mesh
    }

    #[test]
    fn zero_gravity_is_a_fixed_point() {
        let g = square(20.0, 2.0);
        let cfg = SimConfig { gravity: 0.0, ..SimConfig::default() };
        let (out, report) = simulate(&g, &StitchPairs::default(), &far_sphere(), &cfg).unwrap();
        assert!(report.converged);
        assert_eq!(report.frames_run, 1);
        for (a, b) in out.vertices.iter().zip(&g.vertices) {
            for k in 0..3 {
                assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
    }

    #[test]
    fn free_fall_is_determined_by_gravity() {
        let g = square(10.0, 2.0);
        let cfg = SimConfig { damping: 0.0, max_frames: 5, ..SimConfig::default() };
        let (out, report) = simulate(&g, &StitchPairs::default(), &far_sphere(), &cfg).unwrap();
        assert_eq!(report.frames_run, 5);
        let dt = cfg.time_step;
        // Symplectic Euler drop after n frames: g·dt²·n(n+1)/2.
        let want = cfg.gravity * dt * dt * 15.0;
        for (a, b) in out.vertices.iter().zip(&g.vertices) {
            assert!((b.y - a.y - want).abs() < 1e-9);
        }
    }

    #[test]
    fn kinetic_energy_never_grows_without_forces() {
        let g = square(12.0, 2.0);
        let body = far_sphere();
        let cfg = SimConfig { gravity: 0.0, ..SimConfig::default() };
        let mut s = Solver::new(&g, &StitchPairs::default(), &body, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = (0..g.vertex_count())
            .map(|_| Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        s.set_velocities(v);
        let mut e = s.kinetic_energy();
        for _ in 0..50 {
            s.step();
            let next = s.kinetic_energy();
            assert!(next <= e * (1.0 + 1e-9), "{next} > {e}");
            e = next;
        }
    }

    #[test]
    fn labels_are_untouched_and_runs_repeat_exactly() {
        let g = square(20.0, 2.5);
        let (v, t) = icosphere(Vec3::new(0.0, -8.0, 0.0), 6.0, 3);
        let body = BodyModel::new(v, t);
        let cfg = SimConfig { max_frames: 40, ..SimConfig::default() };
        let (a, ra) = simulate(&g, &StitchPairs::default(), &body, &cfg).unwrap();
        let (b, rb) = simulate(&g, &StitchPairs::default(), &body, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(a.labels, g.labels);
    }

    #[test]
    fn blow_up_is_reported() {
        let g = square(10.0, 2.0);
        let cfg = SimConfig { gravity: f64::MAX, time_step: 1e200, max_frames: 3, ..SimConfig::default() };
        let (_, report) = simulate(&g, &StitchPairs::default(), &far_sphere(), &cfg).unwrap();
        assert!(report.non_finite && report.failed);
    }

    #[test]
    fn bad_config_is_rejected() {
        let g = square(10.0, 2.0);
        let cfg = SimConfig { solver_iterations: 0, ..SimConfig::default() };
        assert!(simulate(&g, &StitchPairs::default(), &far_sphere(), &cfg).is_err());
    }
}
