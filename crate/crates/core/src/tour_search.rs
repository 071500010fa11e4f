//! Trajectory-tree depth-first search over window-node sequences: extends a
//! partial tour one window-node at a time via point-to-moving-target queries,
//! prunes branches that arrive too late for some unvisited target, and
//! returns the first feasible full tour.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::model::{target_position, Instance, Interception, Solution, Trajectory};
use crate::planner::point_to_moving_target_search;
use crate::scalar::{real, Real};
use crate::visgraph::Scene;
use crate::window_graph::{build_time_window_graph, TimeWindowGraph};

/// One node of the trajectory tree: a window-node sequence (starting with the
/// depot), the partial trajectory intercepting it in order, and its final time.
#[derive(Clone, Debug)]
pub struct TreeNode<F> {
    pub seq: Vec<usize>,
    pub trajectory: Trajectory<F>,
    pub final_time: F,
    pub visited: TargetSet,
    pub interceptions: Vec<Interception<F>>,
}

/// Bitset over target indices (instance order).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TargetSet {
    words: Vec<u64>,
    count: usize,
}

impl TargetSet {
    pub fn new(n: usize) -> Self {
        TargetSet {
            words: vec![0; n.div_ceil(64)],
            count: 0,
        }
    }

    pub fn insert(&mut self, idx: usize) {
        let (w, b) = (idx / 64, idx % 64);
        if self.words[w] & (1 << b) == 0 {
            self.words[w] |= 1 << b;
            self.count += 1;
        }
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.words[idx / 64] & (1 << (idx % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Outcome of the tour search.
#[derive(Clone, Debug)]
pub enum SolveOutcome<F> {
    Feasible(Solution<F>),
    Infeasible,
    Timeout,
}

impl<F> SolveOutcome<F> {
    pub fn status_str(&self) -> &'static str {
        match self {
            SolveOutcome::Feasible(_) => "feasible",
            SolveOutcome::Infeasible => "infeasible",
            SolveOutcome::Timeout => "timeout",
        }
    }

    pub fn solution(&self) -> Option<&Solution<F>> {
        match self {
            SolveOutcome::Feasible(s) => Some(s),
            _ => None,
        }
    }
}

/// Counters from one DFS run.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SearchStats {
    pub nodes_popped: usize,
    pub astar_calls: usize,
    pub prunes: usize,
}

/// Knobs for [`dfs_solve`].
#[derive(Clone, Copy, Debug)]
pub struct DfsOptions {
    /// Wall-clock budget; `None` runs to completion.
    pub budget: Option<Duration>,
    /// Enables the too-late-for-an-unvisited-target prune.
    pub lookahead: bool,
}

impl Default for DfsOptions {
    fn default() -> Self {
        DfsOptions {
            budget: None,
            lookahead: true,
        }
    }
}

/// Successor window-nodes of a tree node: edge present with `T <= LFDT`,
/// target unvisited, and the depot only once every target is done.
pub fn successor_window_nodes<F: Real>(
    node: &TreeNode<F>,
    gtw: &TimeWindowGraph<F>,
    scene: &Scene<F>,
    inst: &Instance<F>,
) -> Vec<usize> {
    let last = *node.seq.last().expect("sequence starts at the depot");
    let all_visited = node.visited.len() == inst.targets.len();
    let mut out = Vec::new();
    for v in 0..scene.window_nodes.len() {
        let s = &scene.window_nodes[v];
        if s.is_depot() {
            if !all_visited {
                continue;
            }
        } else {
            let target_idx = inst
                .targets
                .iter()
                .position(|t| t.id == s.target_id)
                .expect("window-node target exists");
            if node.visited.contains(target_idx) {
                continue;
            }
        }
        match gtw.lfdt(last, v) {
            Some(lfdt) if node.final_time <= lfdt => out.push(v),
            _ => {}
        }
    }
    out
}

/// Infeasible iff some unvisited target's best remaining departure deadline
/// from `s_new` is already strictly in the past at time `t_new`.
pub fn lookahead<F: Real>(
    visited: &TargetSet,
    s_new: usize,
    t_new: F,
    gtw: &TimeWindowGraph<F>,
    inst: &Instance<F>,
) -> bool {
    for target_idx in 0..inst.targets.len() {
        if visited.contains(target_idx) {
            continue;
        }
        if t_new > gtw.max_lfdt_to_target(s_new, target_idx) {
            return false;
        }
    }
    true
}

/// Joins two trajectory pieces at their shared junction waypoint.
/// The tail must begin where and when the head ends.
pub fn concatenate<F: Real>(head: &Trajectory<F>, tail: &Trajectory<F>) -> Trajectory<F> {
    let end = head.last();
    let start = tail.first();
    let tol = real::<F>(1e-6) * (F::one() + end.t.abs());
    assert!(
        (end.t - start.t).abs() <= tol && end.p.dist(start.p) <= tol,
        "trajectory junction mismatch: ({}, {:?}) vs ({}, {:?})",
        end.t,
        end.p,
        start.t,
        start.p
    );
    let mut joined = head.clone();
    for w in &tail.waypoints()[1..] {
        joined.push(w.t, w.p);
    }
    joined
}

/// Depth-first tour construction. Pops the pending tree node with the
/// smallest final time among the last expansion's children (children are
/// pushed in decreasing final-time order), extends it toward every successor
/// window-node, and returns the first full tour that closes at the depot.
pub fn dfs_solve<F: Real>(
    inst: &Instance<F>,
    scene: &Scene<F>,
    gtw: &TimeWindowGraph<F>,
    opts: &DfsOptions,
) -> (SolveOutcome<F>, SearchStats) {
    let mut stats = SearchStats::default();
    let started = Instant::now();
    let root = TreeNode {
        seq: vec![0],
        trajectory: Trajectory::single(F::zero(), inst.depot),
        final_time: F::zero(),
        visited: TargetSet::new(inst.targets.len()),
        interceptions: Vec::new(),
    };
    if inst.targets.is_empty() {
        // The empty tour is already closed.
        return (
            SolveOutcome::Feasible(Solution {
                trajectory: root.trajectory,
                final_time: F::zero(),
                interceptions: Vec::new(),
            }),
            stats,
        );
    }

    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        stats.nodes_popped += 1;
        if let Some(budget) = opts.budget {
            if started.elapsed() > budget {
                return (SolveOutcome::Timeout, stats);
            }
        }
        debug_assert!(tree_node_consistent(&node, scene, inst));

        let mut successors: Vec<TreeNode<F>> = Vec::new();
        for v in successor_window_nodes(&node, gtw, scene, inst) {
            let start = node.trajectory.last().p;
            let plan = point_to_moving_target_search(start, node.final_time, v, scene, inst);
            stats.astar_calls += 1;
            let Some(tail) = plan.trajectory else {
                // Condition 1 promises feasibility; tolerate numeric misses.
                continue;
            };
            let t_new = plan.arrival;
            let mut seq = node.seq.clone();
            seq.push(v);
            let s = &scene.window_nodes[v];
            // Unvisited targets are judged against the extended sequence.
            let mut visited = node.visited.clone();
            if !s.is_depot() {
                visited.insert(
                    inst.targets
                        .iter()
                        .position(|t| t.id == s.target_id)
                        .expect("known target"),
                );
            }
            if opts.lookahead && !lookahead(&visited, v, t_new, gtw, inst) {
                stats.prunes += 1;
                continue;
            }
            let joined = concatenate(&node.trajectory, &tail);
            if s.is_depot() {
                return (
                    SolveOutcome::Feasible(Solution {
                        trajectory: joined,
                        final_time: t_new,
                        interceptions: node.interceptions.clone(),
                    }),
                    stats,
                );
            }
            let mut interceptions = node.interceptions.clone();
            interceptions.push(Interception {
                target: s.target_id,
                window_index: s.window_index,
                time: t_new,
            });
            successors.push(TreeNode {
                seq,
                trajectory: joined,
                final_time: t_new,
                visited,
                interceptions,
            });
        }
        // Decreasing final time (ties: decreasing node id) so the earliest
        // finisher is popped first.
        successors.sort_by(|a, b| {
            b.final_time
                .partial_cmp(&a.final_time)
                .unwrap()
                .then(b.seq.last().cmp(&a.seq.last()))
        });
        stack.extend(successors);
    }
    (SolveOutcome::Infeasible, stats)
}

/// Debug-build invariant: the stored trajectory intercepts the stored
/// sequence in order and ends at the recorded final time.
fn tree_node_consistent<F: Real>(node: &TreeNode<F>, scene: &Scene<F>, inst: &Instance<F>) -> bool {
    if node.trajectory.final_time() != node.final_time {
        return false;
    }
    let tol = real::<F>(1e-6) * inst.diameter();
    let mut prev = F::zero();
    for (i, itc) in node.interceptions.iter().enumerate() {
        let s = &scene.window_nodes[node.seq[i + 1]];
        if itc.target != s.target_id || itc.time < prev {
            return false;
        }
        let node_ref = scene.window_nodes[node.seq[i + 1]];
        let target_pos = target_position(&node_ref, itc.time, inst);
        if node.trajectory.position_at(itc.time).dist(target_pos) > tol {
            return false;
        }
        prev = itc.time;
    }
    true
}

/// Phase timings and counters for one full solve, mirroring the solver's
/// three components.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SolveStats {
    pub visibility_s: f64,
    pub twg_s: f64,
    pub tree_s: f64,
    pub nodes_popped: usize,
    pub astar_calls: usize,
    pub prunes: usize,
}

/// Everything produced by [`solve_instance`].
#[derive(Debug)]
pub struct SolveReport<F> {
    pub outcome: SolveOutcome<F>,
    pub stats: SolveStats,
}

/// Full pipeline: visibility products, time window graph, then the DFS.
pub fn solve_instance<F: Real>(inst: &Instance<F>, opts: &DfsOptions) -> SolveReport<F> {
    let t0 = Instant::now();
    let scene = Scene::build(inst);
    let visibility_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let gtw = build_time_window_graph(inst, &scene);
    let twg_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let (outcome, search) = dfs_solve(inst, &scene, &gtw, opts);
    let tree_s = t2.elapsed().as_secs_f64();

    SolveReport {
        outcome,
        stats: SolveStats {
            visibility_s,
            twg_s,
            tree_s,
            nodes_popped: search.nodes_popped,
            astar_calls: search.astar_calls,
            prunes: search.prunes,
        },
    }
}
