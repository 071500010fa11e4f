//! Sampled-points baseline: discretize each target's windows into timed
//! points, connect them with max-speed-then-wait transfers, and search the
//! resulting generalized TSP for a feasible point sequence, escalating the
//! sample count until one exists.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::geometry::Point;
use crate::model::{Instance, Interception, Solution, Trajectory};
use crate::scalar::{real, Real};
use crate::visgraph::{augmented_adjacency, dijkstra, VisibilityGraph};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("{n_targets} targets exceed the exact-search cap of {cap}")]
    CapExceeded { n_targets: usize, cap: usize },
}

/// A sampled space-time point on one target's trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint<F> {
    pub target_id: u32,
    /// Cluster index (instance target order).
    pub target_idx: usize,
    pub window_index: usize,
    pub t: F,
    pub p: Point<F>,
}

/// `n_per_target` points per target, spaced uniformly in time over the
/// target's concatenated windows (endpoints included for `n >= 2`; a single
/// point lands on the left endpoint). Offsets falling exactly on a window
/// seam belong to the earlier window's right endpoint. Exact space-time
/// coincidences across targets are broken by nudging the later target's
/// sample forward by 1 ns.
pub fn sample_points<F: Real>(inst: &Instance<F>, n_per_target: usize) -> Vec<SamplePoint<F>> {
    assert!(n_per_target >= 1);
    let mut points = Vec::with_capacity(n_per_target * inst.targets.len());
    for (target_idx, target) in inst.targets.iter().enumerate() {
        let total: F = target
            .windows
            .iter()
            .fold(F::zero(), |acc, w| acc + w.length());
        for k in 0..n_per_target {
            let offset = if n_per_target == 1 {
                F::zero()
            } else {
                total * real::<F>(k as f64) / real::<F>((n_per_target - 1) as f64)
            };
            let (window_index, t) = offset_to_window_time(target, offset);
            let p = target.windows[window_index].position(t);
            points.push(SamplePoint {
                target_id: target.id,
                target_idx,
                window_index,
                t,
                p,
            });
        }
    }
    // Break exact coincidences (they would permit subtours in the GTSP).
    let nudge = real::<F>(1e-9);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i].target_idx != points[j].target_idx
                && points[i].t == points[j].t
                && points[i].p == points[j].p
            {
                let w = inst.targets[points[j].target_idx].windows[points[j].window_index];
                // Window-end samples shift backward instead.
                let t = if points[j].t + nudge <= w.tf {
                    points[j].t + nudge
                } else {
                    points[j].t - nudge
                };
                points[j].t = t;
                points[j].p = w.position(t);
            }
        }
    }
    points
}

fn offset_to_window_time<F: Real>(
    target: &crate::model::Target<F>,
    offset: F,
) -> (usize, F) {
    let mut rest = offset;
    for (j, w) in target.windows.iter().enumerate() {
        let len = w.length();
        if rest <= len {
            return (j, w.t0 + rest);
        }
        rest -= len;
    }
    (target.windows.len() - 1, target.windows.last().unwrap().tf)
}

/// Shortest spatial paths between every pair of sites (sample points plus the
/// depot), over the visibility graph.
pub struct TransferTable<F> {
    /// `dist[i][j]`: shortest path length from site `i` to site `j`.
    dist: Vec<Vec<F>>,
    /// Dijkstra parents per source site, over augmented node ids.
    parents: Vec<Vec<usize>>,
    site_nodes: Vec<usize>,
    positions: Vec<Point<F>>,
    n_points: usize,
}

impl<F: Real> TransferTable<F> {
    pub fn distance(&self, from: usize, to: usize) -> F {
        self.dist[from][to]
    }

    pub fn depot_site(&self) -> usize {
        self.n_points
    }

    /// Polyline from site `from` to site `to` (both endpoints included).
    pub fn path(&self, from: usize, to: usize) -> Vec<Point<F>> {
        let parents = &self.parents[from];
        let mut ids = vec![self.site_nodes[to]];
        while *ids.last().unwrap() != self.site_nodes[from] {
            ids.push(parents[*ids.last().unwrap()]);
        }
        ids.reverse();
        ids.into_iter().map(|id| self.positions[id]).collect()
    }
}

/// Builds the transfer table for the sampled points: every site pair gets the
/// exact visibility-graph shortest path length.
pub fn pairwise_transfers<F: Real>(
    points: &[SamplePoint<F>],
    inst: &Instance<F>,
    g: &VisibilityGraph<F>,
) -> TransferTable<F> {
    let extra: Vec<Point<F>> = points.iter().map(|sp| sp.p).collect();
    let adjacency = augmented_adjacency(g, inst, &extra);
    let positions: Vec<Point<F>> = g
        .nodes
        .iter()
        .copied()
        .chain(extra.iter().copied())
        .collect();
    let mut site_nodes: Vec<usize> = (0..points.len()).map(|k| g.len() + k).collect();
    site_nodes.push(g.depot_node);

    let mut dist = Vec::with_capacity(site_nodes.len());
    let mut parents = Vec::with_capacity(site_nodes.len());
    for &site in &site_nodes {
        let (d, par) = dijkstra(&adjacency, site);
        dist.push(site_nodes.iter().map(|&other| d[other]).collect());
        parents.push(par);
    }
    TransferTable {
        dist,
        parents,
        site_nodes,
        positions,
        n_points: points.len(),
    }
}

/// Max-speed transfer feasibility between timed sites.
fn arc_feasible<F: Real>(
    table: &TransferTable<F>,
    v_max: F,
    from: usize,
    t_from: F,
    to: usize,
    t_to: F,
) -> bool {
    t_from <= t_to && table.distance(from, to) / v_max <= t_to - t_from
}

/// Exact feasibility search over (visited-cluster set, current point) states
/// on time-sorted points. Returns a depot-to-depot point sequence visiting
/// one sample per target, or `None`. Masks are tracked per point as bitsets,
/// so complexity is `O(P^2 * 2^N / 64)` words.
pub fn solve_gtsp_feasibility<F: Real>(
    points: &[SamplePoint<F>],
    table: &TransferTable<F>,
    inst: &Instance<F>,
    cap: usize,
) -> Result<Option<Vec<usize>>, BaselineError> {
    let n = inst.targets.len();
    if n > cap {
        return Err(BaselineError::CapExceeded {
            n_targets: n,
            cap,
        });
    }
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let v_max = inst.v_max;
    let n_masks = 1usize << n;
    let words = n_masks.div_ceil(64);
    let full = n_masks - 1;
    let depot = table.depot_site();

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .t
            .partial_cmp(&points[b].t)
            .unwrap()
            .then(a.cmp(&b))
    });

    // reach[j] = bitset over masks (mask includes j's own cluster).
    let mut reach: Vec<Vec<u64>> = vec![vec![0u64; words]; points.len()];
    let set_bit = |bits: &mut [u64], mask: usize| bits[mask / 64] |= 1 << (mask % 64);
    let get_bit = |bits: &[u64], mask: usize| bits[mask / 64] & (1 << (mask % 64)) != 0;

    // Masks not containing bit b, as a bitset filter.
    let mut without: Vec<Vec<u64>> = vec![vec![0u64; words]; n];
    for (b, filt) in without.iter_mut().enumerate() {
        for mask in 0..n_masks {
            if mask & (1 << b) == 0 {
                filt[mask / 64] |= 1 << (mask % 64);
            }
        }
    }

    for (oi, &j) in order.iter().enumerate() {
        let pj = &points[j];
        let cj = pj.target_idx;
        if arc_feasible(table, v_max, depot, F::zero(), j, pj.t) {
            set_bit(&mut reach[j], 1 << cj);
        }
        for &i in &order[..oi] {
            let pi = &points[i];
            if pi.target_idx == cj || !arc_feasible(table, v_max, i, pi.t, j, pj.t) {
                continue;
            }
            // Extend every state at i whose mask misses cj: the new mask is
            // the old one plus bit cj, a shift by 2^cj in mask index space.
            let shift_words = (1usize << cj) / 64;
            let shift_bits = (1usize << cj) % 64;
            let src: Vec<u64> = reach[i]
                .iter()
                .zip(&without[cj])
                .map(|(r, f)| r & f)
                .collect();
            let dst = &mut reach[j];
            for w in 0..words {
                let mut v = 0u64;
                if w >= shift_words {
                    v = src[w - shift_words] << shift_bits;
                    if shift_bits > 0 && w > shift_words {
                        v |= src[w - shift_words - 1] >> (64 - shift_bits);
                    }
                }
                dst[w] |= v;
            }
        }
    }

    // Completion: full mask plus a deadline-free return to the depot.
    let finisher = order.iter().copied().find(|&j| {
        get_bit(&reach[j], full) && table.distance(j, depot).is_finite()
    });
    let Some(last) = finisher else {
        return Ok(None);
    };

    // Walk the sequence back through predecessor states.
    let mut seq = vec![last];
    let mut mask = full;
    let mut cur = last;
    while mask.count_ones() > 1 {
        let prev_mask = mask & !(1 << points[cur].target_idx);
        let pred = order
            .iter()
            .copied()
            .find(|&i| {
                points[i].target_idx != points[cur].target_idx
                    && (prev_mask >> points[i].target_idx) & 1 == 1
                    && get_bit(&reach[i], prev_mask)
                    && arc_feasible(table, v_max, i, points[i].t, cur, points[cur].t)
            })
            .expect("reachable state has a predecessor");
        seq.push(pred);
        mask = prev_mask;
        cur = pred;
    }
    seq.reverse();
    Ok(Some(seq))
}

/// One escalation attempt.
#[derive(Clone, Copy, Debug)]
pub struct Attempt {
    pub n_per_target: usize,
    pub wall_s: f64,
    pub feasible: bool,
}

/// Attempts log in CSV form: `n_per_target,wall_s,status`.
pub fn attempts_csv(attempts: &[Attempt]) -> String {
    let mut out = String::from("n_per_target,wall_s,status\n");
    for a in attempts {
        let status = if a.feasible { "feasible" } else { "infeasible" };
        let _ = writeln!(out, "{},{:.6},{}", a.n_per_target, a.wall_s, status);
    }
    out
}

#[derive(Clone, Debug)]
pub enum BaselineOutcome<F> {
    Feasible(Solution<F>),
    Timeout,
}

#[derive(Debug)]
pub struct BaselineReport<F> {
    pub outcome: BaselineOutcome<F>,
    pub attempts: Vec<Attempt>,
}

impl<F> BaselineReport<F> {
    pub fn solution(&self) -> Option<&Solution<F>> {
        match &self.outcome {
            BaselineOutcome::Feasible(s) => Some(s),
            BaselineOutcome::Timeout => None,
        }
    }

    pub fn status_str(&self) -> &'static str {
        match &self.outcome {
            BaselineOutcome::Feasible(_) => "feasible",
            BaselineOutcome::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BaselineOptions {
    pub start_n: usize,
    pub step: usize,
    pub budget: Option<Duration>,
    pub cluster_cap: usize,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions {
            start_n: 10,
            step: 10,
            budget: Some(Duration::from_secs(300)),
            cluster_cap: 12,
        }
    }
}

/// Escalation loop: solve the sampled GTSP with `start_n` points per target,
/// adding `step` more per round until feasible or out of budget.
pub fn baseline_solve<F: Real>(
    inst: &Instance<F>,
    opts: &BaselineOptions,
) -> Result<BaselineReport<F>, BaselineError> {
    let started = Instant::now();
    let g = VisibilityGraph::build(inst);
    let mut attempts = Vec::new();
    let mut n = opts.start_n;
    loop {
        if opts.budget.is_some_and(|b| started.elapsed() > b) {
            return Ok(BaselineReport {
                outcome: BaselineOutcome::Timeout,
                attempts,
            });
        }
        let attempt_start = Instant::now();
        let points = sample_points(inst, n);
        let table = pairwise_transfers(&points, inst, &g);
        let found = solve_gtsp_feasibility(&points, &table, inst, opts.cluster_cap)?;
        let wall_s = attempt_start.elapsed().as_secs_f64();
        match found {
            Some(seq) => {
                attempts.push(Attempt {
                    n_per_target: n,
                    wall_s,
                    feasible: true,
                });
                let solution = assemble_solution(&seq, &points, &table, inst);
                return Ok(BaselineReport {
                    outcome: BaselineOutcome::Feasible(solution),
                    attempts,
                });
            }
            None => {
                attempts.push(Attempt {
                    n_per_target: n,
                    wall_s,
                    feasible: false,
                });
                n += opts.step;
            }
        }
    }
}

/// Turns a point sequence into a trajectory: max-speed legs along each
/// transfer path, waiting at the destination until its sample time.
fn assemble_solution<F: Real>(
    seq: &[usize],
    points: &[SamplePoint<F>],
    table: &TransferTable<F>,
    inst: &Instance<F>,
) -> Solution<F> {
    let mut traj = Trajectory::single(F::zero(), inst.depot);
    let mut interceptions = Vec::new();
    let mut prev_site = table.depot_site();
    for &j in seq {
        let sp = &points[j];
        move_along(&mut traj, &table.path(prev_site, j), inst.v_max);
        debug_assert!(traj.final_time() <= sp.t + real::<F>(1e-9));
        if traj.final_time() < sp.t {
            traj.push(sp.t, sp.p);
        }
        interceptions.push(Interception {
            target: sp.target_id,
            window_index: sp.window_index,
            time: sp.t,
        });
        prev_site = j;
    }
    move_along(
        &mut traj,
        &table.path(prev_site, table.depot_site()),
        inst.v_max,
    );
    let final_time = traj.final_time();
    Solution {
        trajectory: traj,
        final_time,
        interceptions,
    }
}

fn move_along<F: Real>(traj: &mut Trajectory<F>, path: &[Point<F>], v_max: F) {
    for w in path.windows(2) {
        let dt = w[0].dist(w[1]) / v_max;
        if dt == F::zero() {
            continue;
        }
        let t = traj.final_time() + dt;
        traj.push(t, w[1]);
    }
}
