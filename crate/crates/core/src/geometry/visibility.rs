//! Visibility of a linearly moving point from a static viewpoint.

use super::{segment_is_free, Interval, IntervalSet, ObstacleSet, Point};
use crate::scalar::{real, Real};

/// Linear motion over a time window: position `p0 + vel * (t - t0)`.
#[derive(Clone, Copy, Debug)]
pub struct WindowMotion<F> {
    pub p0: Point<F>,
    pub vel: Point<F>,
    pub t0: F,
    pub tf: F,
}

impl<F: Real> WindowMotion<F> {
    pub fn new(p0: Point<F>, vel: Point<F>, t0: F, tf: F) -> Self {
        debug_assert!(t0 <= tf);
        WindowMotion { p0, vel, t0, tf }
    }

    pub fn position(&self, t: F) -> Point<F> {
        // Stationary motions may have unbounded windows; avoid 0 * inf.
        if self.vel.x == F::zero() && self.vel.y == F::zero() {
            return self.p0;
        }
        self.p0.add(self.vel.scale(t - self.t0))
    }

    pub fn start_pos(&self) -> Point<F> {
        self.p0
    }

    pub fn end_pos(&self) -> Point<F> {
        self.position(self.tf)
    }

    /// The same motion run backwards in time: position at `-t` equals the
    /// forward position at `t`, over the window `[-tf, -t0]`.
    pub fn reversed(&self) -> WindowMotion<F> {
        WindowMotion {
            p0: self.end_pos(),
            vel: Point::new(-self.vel.x, -self.vel.y),
            t0: -self.tf,
            tf: -self.t0,
        }
    }
}

/// Maximal closed subintervals of the motion's window during which the open
/// segment from `q` to the moving point stays out of every obstacle interior.
/// Instants of grazing visibility are included.
///
/// Visibility can only flip when the sight line sweeps through an obstacle
/// vertex or the moving point crosses an edge's supporting line, so the
/// window is partitioned at those critical times and each piece is classified
/// by one exact segment test (no sampling).
pub fn visible_sub_intervals<F: Real>(
    q: Point<F>,
    motion: &WindowMotion<F>,
    obs: &ObstacleSet<F>,
) -> IntervalSet<F> {
    if obs.is_empty() {
        return IntervalSet::single(motion.t0, motion.tf);
    }
    let span = motion.tf - motion.t0;
    let mut times: Vec<F> = vec![motion.t0, motion.tf];
    let a = motion.p0.sub(q);
    for poly in &obs.polygons {
        let n = poly.len();
        for i in 0..n {
            let c = poly[i];
            let d = poly[(i + 1) % n];
            // Sight line through vertex c: cross(P(t) - q, c - q) = 0.
            let w = c.sub(q);
            push_root(&mut times, a.cross(w), motion.vel.cross(w), motion);
            // Moving point on the supporting line of edge (c, d):
            // cross(d - c, P(t) - c) = 0.
            let e = d.sub(c);
            push_root(&mut times, e.cross(motion.p0.sub(c)), e.cross(motion.vel), motion);
        }
    }
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let dedup_tol = real::<F>(1e-12) * (F::one() + span.abs());
    times.dedup_by(|x, y| (*x - *y).abs() <= dedup_tol);

    let free_at = |t: F| segment_is_free(q, motion.position(t), obs);
    let mut pieces: Vec<Interval<F>> = Vec::new();
    let half = real::<F>(0.5);
    for w in times.windows(2) {
        if free_at((w[0] + w[1]) * half) {
            pieces.push(Interval::new(w[0], w[1]));
        }
    }
    // Grazing instants: visible only at the critical time itself.
    for &t in &times {
        if free_at(t) {
            pieces.push(Interval::new(t, t));
        }
    }
    IntervalSet::from_pieces(pieces)
}

/// Root of `k0 + k1 * (t - t0) = 0` pushed into `times` when inside the window.
fn push_root<F: Real>(times: &mut Vec<F>, k0: F, k1: F, motion: &WindowMotion<F>) {
    if k1 == F::zero() {
        return;
    }
    let t = motion.t0 - k0 / k1;
    if t > motion.t0 && t < motion.tf {
        times.push(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::load_occupancy_grid;

    fn pt(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> ObstacleSet<f64> {
        ObstacleSet::from_loops(vec![vec![
            pt(x0, y0),
            pt(x1, y0),
            pt(x1, y1),
            pt(x0, y1),
        ]])
    }

    /// Dense-sampling reference: classify each step and merge runs.
    fn sampled_intervals(
        q: Point<f64>,
        motion: &WindowMotion<f64>,
        obs: &ObstacleSet<f64>,
        step: f64,
    ) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut run_start: Option<f64> = None;
        let n = ((motion.tf - motion.t0) / step).ceil() as usize;
        for i in 0..=n {
            let t = (motion.t0 + i as f64 * step).min(motion.tf);
            let free = segment_is_free(q, motion.position(t), obs);
            match (free, run_start) {
                (true, None) => run_start = Some(t),
                (false, Some(s)) => {
                    out.push((s, t - step));
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            out.push((s, motion.tf));
        }
        out
    }

    #[test]
    fn no_obstacles_full_window() {
        let motion = WindowMotion::new(pt(4.0, -2.0), pt(0.0, 1.0), 0.0, 4.0);
        let vis = visible_sub_intervals(pt(0.0, 0.0), &motion, &ObstacleSet::empty());
        assert_eq!(vis.intervals(), &[Interval::new(0.0, 4.0)]);
    }

    #[test]
    fn fully_occluded_motion() {
        let obs = square(1.0, -1.0, 2.0, 1.0);
        let motion = WindowMotion::new(pt(4.0, -0.5), pt(0.0, 0.25), 0.0, 4.0);
        let vis = visible_sub_intervals(pt(0.0, 0.0), &motion, &obs);
        assert!(vis.is_empty());
    }

    #[test]
    fn occlusion_starts_when_sight_crosses_corner() {
        // Target rises along x = 4 from y = -2; the square [1,2]x[0,1] hides
        // it from the origin exactly once y > 0 (sight through (2, 0) grazes).
        let obs = square(1.0, 0.0, 2.0, 1.0);
        let motion = WindowMotion::new(pt(4.0, -2.0), pt(0.0, 1.0), 0.0, 4.0);
        let vis = visible_sub_intervals(pt(0.0, 0.0), &motion, &obs);
        assert_eq!(vis.len(), 1);
        let iv = vis.intervals()[0];
        assert!((iv.lo - 0.0).abs() < 1e-12);
        assert!((iv.hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_sampling_on_grid_scene() {
        let obs = load_occupancy_grid::<f64>(
            6,
            6,
            1.0,
            &[(1, 2), (2, 2), (3, 3), (4, 1), (0, 4)],
        )
        .unwrap();
        let q = pt(0.25, 0.25);
        let motion = WindowMotion::new(pt(5.5, 0.5), pt(-0.7, 0.9), 1.0, 6.0);
        let vis = visible_sub_intervals(q, &motion, &obs);
        let step = 1e-3;
        let reference = sampled_intervals(q, &motion, &obs, step);
        assert_eq!(vis.len(), reference.len());
        for (iv, (lo, hi)) in vis.intervals().iter().zip(&reference) {
            assert!((iv.lo - lo).abs() <= 2.0 * step, "lo {} vs {}", iv.lo, lo);
            assert!((iv.hi - hi).abs() <= 2.0 * step, "hi {} vs {}", iv.hi, hi);
        }
    }

    #[test]
    fn stationary_target_two_cases() {
        let obs = square(1.0, -1.0, 2.0, 1.0);
        let hidden = WindowMotion::new(pt(3.0, 0.0), pt(0.0, 0.0), 2.0, 7.0);
        assert!(visible_sub_intervals(pt(0.0, 0.0), &hidden, &obs).is_empty());
        let seen = WindowMotion::new(pt(0.0, 3.0), pt(0.0, 0.0), 2.0, 7.0);
        let vis = visible_sub_intervals(pt(0.0, 0.0), &seen, &obs);
        assert_eq!(vis.intervals(), &[Interval::new(2.0, 7.0)]);
    }

    #[test]
    fn reversed_motion_reflects_intervals() {
        let obs = square(1.0, 0.0, 2.0, 1.0);
        let motion = WindowMotion::new(pt(4.0, -2.0), pt(0.0, 1.0), 0.0, 4.0);
        let fwd = visible_sub_intervals(pt(0.0, 0.0), &motion, &obs);
        let rev = visible_sub_intervals(pt(0.0, 0.0), &motion.reversed(), &obs);
        assert_eq!(rev, fwd.reflect());
    }
}
