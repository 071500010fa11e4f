//! Point-to-moving-target planning on the moving target visibility graph:
//! closed-form shortest feasible travel, the A* search over position-nodes
//! with a time-dependent goal edge, and latest feasible departure times via
//! time reversal.

use std::borrow::Cow;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::geometry::{
    point_segment_distance, segment_is_free, visible_sub_intervals, Interval, IntervalSet, Point,
    WindowMotion,
};
use crate::model::{node_motion, Instance, Trajectory, WindowNode};
use crate::scalar::{OrdF, Real};
use crate::visgraph::{Scene, VisibilityGraph, VisibleIntervalTable};

/// Shortest feasible travel: minimum duration of a straight-line move from
/// `(q, t)` that intercepts the motion inside `interval`, subject to the
/// speed limit. `None` when no interception time in the interval works.
///
/// With `y` the travel duration and `B` the target's offset from `q` at the
/// departure time, feasibility is `|B + vel*y| <= v_max*y`, a quadratic
/// `a*y^2 + b*y + c <= 0` with `a = |vel|^2 - v_max^2 <= 0`, `b = 2*B.vel`,
/// `c = |B|^2 >= 0`; the earliest admissible `y` is taken.
pub fn sft<F: Real>(
    q: Point<F>,
    t: F,
    motion: &WindowMotion<F>,
    interval: Interval<F>,
    v_max: F,
) -> Option<F> {
    let y_lo = if interval.lo > t {
        interval.lo - t
    } else {
        F::zero()
    };
    let y_hi = interval.hi - t;
    if y_hi < y_lo {
        return None;
    }
    let b_vec = motion.position(t).sub(q);
    let a = motion.vel.dot(motion.vel) - v_max * v_max;
    let b = b_vec.dot(motion.vel) * crate::scalar::real(2.0);
    let c = b_vec.dot(b_vec);

    let feasible_at = |y: F| a * y * y + b * y + c <= F::zero();
    let y = if a == F::zero() {
        // Target moves exactly at v_max: the constraint is linear.
        if b < F::zero() {
            let y_star = -c / b;
            Some(y_lo.max(y_star))
        } else if c == F::zero() {
            // Co-located at departure; any waiting works only if b == 0.
            if b == F::zero() {
                Some(y_lo)
            } else if y_lo == F::zero() {
                Some(F::zero())
            } else {
                None
            }
        } else {
            None
        }
    } else {
        // a < 0, c >= 0 force a real root pair straddling zero; tangent
        // contacts appear as a vanishing discriminant, clamped at zero.
        if feasible_at(y_lo) {
            Some(y_lo)
        } else {
            let disc = (b * b - crate::scalar::real::<F>(4.0) * a * c).max(F::zero());
            let sq = disc.sqrt();
            let qq = if b >= F::zero() {
                -(b + sq) / crate::scalar::real(2.0)
            } else {
                -(b - sq) / crate::scalar::real(2.0)
            };
            let (r1, r2) = (qq / a, if qq == F::zero() { F::zero() } else { c / qq });
            let y2 = r1.max(r2);
            if y2 >= y_lo {
                Some(y2)
            } else {
                None
            }
        }
    }?;
    (y <= y_hi).then_some(y)
}

/// Cost of the goal edge `(q, s)` when departing at `t`: the minimum SFT over
/// the visible intervals. `None` when unreachable.
pub fn edge_cost_to_goal<F: Real>(
    q: Point<F>,
    t: F,
    motion: &WindowMotion<F>,
    vis: &IntervalSet<F>,
    v_max: F,
) -> Option<F> {
    // Intervals are time-sorted, so the first feasible one holds the minimum.
    for &iv in vis.intervals() {
        if let Some(d) = sft(q, t, motion, iv, v_max) {
            return Some(d);
        }
    }
    None
}

/// Admissible remaining-time estimate: straight-line distance to the goal's
/// spatial segment over `v_max`.
pub fn heuristic<F: Real>(p: Point<F>, goal: &WindowMotion<F>, v_max: F) -> F {
    point_segment_distance(p, goal.start_pos(), goal.end_pos()) / v_max
}

/// How goal-edge visible intervals are obtained for each position-node.
pub enum GoalVis<'a, F> {
    /// Forward query against a real window-node: table lookup.
    Table(&'a VisibleIntervalTable<F>, usize),
    /// Prebuilt per-node interval sets (e.g. a reflected column for reversed
    /// queries, cached by the caller).
    Column(&'a [IntervalSet<F>]),
    /// Computed from geometry on demand (fictitious goals).
    Fresh,
}

/// The moving target visibility graph for one query: the base graph, the
/// start point (either an existing node or a fresh one with its own edge
/// fan), and the goal's incoming edges with their visible intervals.
pub struct Mtvg<'a, F: Real> {
    pub base: &'a VisibilityGraph<F>,
    pub goal_motion: WindowMotion<F>,
    start_index: usize,
    fresh_start: Option<(Point<F>, Vec<(usize, F)>)>,
    goal_vis: Vec<Cow<'a, IntervalSet<F>>>,
}

impl<'a, F: Real> Mtvg<'a, F> {
    fn position_count(&self) -> usize {
        self.base.len() + usize::from(self.fresh_start.is_some())
    }

    fn position(&self, idx: usize) -> Point<F> {
        if idx < self.base.len() {
            self.base.nodes[idx]
        } else {
            self.fresh_start.as_ref().expect("fresh start present").0
        }
    }

    /// Visible intervals on the goal edge from position `idx` (empty = no edge).
    pub fn goal_vis(&self, idx: usize) -> &IntervalSet<F> {
        &self.goal_vis[idx]
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }
}

/// Builds the MTVG for a query from `p` to the goal motion. `p` is matched
/// against existing graph nodes; otherwise its visibility fan is computed.
pub fn construct_mtvg<'a, F: Real>(
    p: Point<F>,
    goal_motion: WindowMotion<F>,
    goal_vis: GoalVis<'a, F>,
    g: &'a VisibilityGraph<F>,
    inst: &Instance<F>,
) -> Mtvg<'a, F> {
    let existing = g.find_node(p);
    let fresh_start = match existing {
        Some(_) => None,
        None => Some((p, g.visible_nodes(p, inst))),
    };
    let start_index = existing.unwrap_or(g.len());

    let fresh_vis = |q: Point<F>| -> IntervalSet<F> {
        if !goal_motion.t0.is_finite() || !goal_motion.tf.is_finite() {
            // Unbounded windows only occur for stationary goals.
            if segment_is_free(q, goal_motion.p0, &inst.obstacles) {
                IntervalSet::single(goal_motion.t0, goal_motion.tf)
            } else {
                IntervalSet::empty()
            }
        } else {
            visible_sub_intervals(q, &goal_motion, &inst.obstacles)
        }
    };

    let n_pos = g.len() + usize::from(fresh_start.is_some());
    let mut vis: Vec<Cow<'a, IntervalSet<F>>> = Vec::with_capacity(n_pos);
    for idx in 0..n_pos {
        let entry = if idx < g.len() {
            match goal_vis {
                GoalVis::Table(table, s_idx) => Cow::Borrowed(table.get(idx, s_idx)),
                GoalVis::Column(col) => Cow::Borrowed(&col[idx]),
                GoalVis::Fresh => Cow::Owned(fresh_vis(g.nodes[idx])),
            }
        } else {
            Cow::Owned(fresh_vis(p))
        };
        vis.push(entry);
    }

    Mtvg {
        base: g,
        goal_motion,
        start_index,
        fresh_start,
        goal_vis: vis,
    }
}

/// Result of one point-to-moving-target query.
#[derive(Clone, Debug)]
pub struct PlanResult<F> {
    /// Trajectory from `(p, T)` to the interception; `None` when infeasible.
    pub trajectory: Option<Trajectory<F>>,
    /// Interception time `T + g(s)`, `+inf` when infeasible.
    pub arrival: F,
    /// Position-nodes expanded by the search.
    pub expansions: usize,
}

impl<F: Real> PlanResult<F> {
    pub fn is_feasible(&self) -> bool {
        self.trajectory.is_some()
    }

    fn infeasible(expansions: usize) -> Self {
        PlanResult {
            trajectory: None,
            arrival: F::infinity(),
            expansions,
        }
    }
}

/// Per-expansion rows for the optional search trace dump.
#[derive(Clone, Debug, Default)]
pub struct SearchTrace {
    pub rows: Vec<(usize, f64, f64, i64)>,
}

impl SearchTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,g,f,parent\n");
        for (node, g, f, parent) in &self.rows {
            let _ = writeln!(out, "{node},{g},{f},{parent}");
        }
        out
    }
}

/// A* from `(p, T)` to the window-node with index `s_idx` (0 = depot) of the
/// scene. Returns a minimum-time interception trajectory if one exists.
pub fn point_to_moving_target_search<F: Real>(
    p: Point<F>,
    start_time: F,
    s_idx: usize,
    scene: &Scene<F>,
    inst: &Instance<F>,
) -> PlanResult<F> {
    let goal_motion = goal_motion_of(&scene.window_nodes[s_idx], inst);
    let mtvg = construct_mtvg(
        p,
        goal_motion,
        GoalVis::Table(&scene.table, s_idx),
        &scene.graph,
        inst,
    );
    astar(&mtvg, start_time, inst, None)
}

/// As [`point_to_moving_target_search`], recording an expansion trace.
pub fn point_to_moving_target_search_traced<F: Real>(
    p: Point<F>,
    start_time: F,
    s_idx: usize,
    scene: &Scene<F>,
    inst: &Instance<F>,
    trace: &mut SearchTrace,
) -> PlanResult<F> {
    let goal_motion = goal_motion_of(&scene.window_nodes[s_idx], inst);
    let mtvg = construct_mtvg(
        p,
        goal_motion,
        GoalVis::Table(&scene.table, s_idx),
        &scene.graph,
        inst,
    );
    astar(&mtvg, start_time, inst, Some(trace))
}

/// The motion a window-node presents as a goal; the depot is a stationary
/// target with an unbounded window.
pub fn goal_motion_of<F: Real>(node: &WindowNode<F>, inst: &Instance<F>) -> WindowMotion<F> {
    if node.is_depot() {
        WindowMotion::new(inst.depot, Point::new(F::zero(), F::zero()), F::zero(), F::infinity())
    } else {
        node_motion(node, inst)
    }
}

/// Core A* on an MTVG (Alg. 1 shape): g-values are travel times from the
/// start; the goal edge cost is evaluated at departure time `T + g(v)`; a
/// candidate enters OPEN only while `g_cand <= tf(s) - T`; the search stops
/// when the goal would be expanded or OPEN drains.
pub fn astar<F: Real>(
    mtvg: &Mtvg<'_, F>,
    start_time: F,
    inst: &Instance<F>,
    mut trace: Option<&mut SearchTrace>,
) -> PlanResult<F> {
    let n_pos = mtvg.position_count();
    let goal_idx = n_pos;
    // Termination cap on travel time. SFT already guarantees in-window
    // interception, so a hair of slack here only keeps exact-deadline
    // arrivals from being dropped to rounding.
    let cap = {
        let raw = mtvg.goal_motion.tf - start_time;
        raw + crate::scalar::real::<F>(1e-9) * (F::one() + raw.abs().min(crate::scalar::real(1e12)))
    };
    let v_max = inst.v_max;

    let mut g = vec![F::infinity(); n_pos + 1];
    let mut parent = vec![usize::MAX; n_pos + 1];
    let mut closed = vec![false; n_pos + 1];
    // Min-heap on (f, larger-g-first, node id).
    type Key<F> = (OrdF<F>, Reverse<OrdF<F>>, usize);
    let mut open: BinaryHeap<Reverse<Key<F>>> = BinaryHeap::new();

    let start = mtvg.start_index();
    g[start] = F::zero();
    let h0 = heuristic(mtvg.position(start), &mtvg.goal_motion, v_max);
    open.push(Reverse((OrdF(h0), Reverse(OrdF(F::zero())), start)));

    let mut expansions = 0usize;
    while let Some(Reverse((f, Reverse(g_pushed), v))) = open.pop() {
        if v == goal_idx {
            // f(s) <= min f over OPEN: the goal's arrival is settled.
            break;
        }
        if closed[v] || g_pushed.0 > g[v] {
            continue;
        }
        closed[v] = true;
        expansions += 1;
        if let Some(tr) = trace.as_deref_mut() {
            tr.rows.push((
                v,
                g[v].to_f64().unwrap_or(f64::INFINITY),
                f.0.to_f64().unwrap_or(f64::INFINITY),
                parent[v] as i64,
            ));
        }
        let depart = start_time + g[v];
        let pos_v = mtvg.position(v);

        let relax = |v2: usize, g_cand: F, h: F, parent_arr: &mut Vec<usize>, g_arr: &mut Vec<F>, open: &mut BinaryHeap<Reverse<Key<F>>>| {
            if g_cand < g_arr[v2] && !closed[v2] && g_cand <= cap {
                g_arr[v2] = g_cand;
                parent_arr[v2] = v;
                open.push(Reverse((OrdF(g_cand + h), Reverse(OrdF(g_cand)), v2)));
            }
        };

        // Position-node successors: static Euclidean travel times.
        let neighbors: &[(usize, F)] = if v < mtvg.base.len() {
            &mtvg.base.adjacency[v]
        } else {
            &mtvg.fresh_start.as_ref().expect("fresh start").1
        };
        for &(v2, dist) in neighbors {
            let g_cand = g[v] + dist / v_max;
            let h = heuristic(mtvg.base.nodes[v2], &mtvg.goal_motion, v_max);
            relax(v2, g_cand, h, &mut parent, &mut g, &mut open);
        }
        // Goal edge, when some interval is still catchable from here.
        if let Some(d) = edge_cost_to_goal(pos_v, depart, &mtvg.goal_motion, mtvg.goal_vis(v), v_max)
        {
            relax(goal_idx, g[v] + d, F::zero(), &mut parent, &mut g, &mut open);
        }
    }

    if !g[goal_idx].is_finite() {
        return PlanResult::infeasible(expansions);
    }
    let arrival = start_time + g[goal_idx];
    let trajectory = construct_trajectory(mtvg, start_time, arrival, &g, &parent, goal_idx, v_max);
    PlanResult {
        trajectory: Some(trajectory),
        arrival,
        expansions,
    }
}

/// Backpointer traversal: max-speed legs between position-nodes, then the
/// straight SFT line to the interception point.
fn construct_trajectory<F: Real>(
    mtvg: &Mtvg<'_, F>,
    start_time: F,
    arrival: F,
    g: &[F],
    parent: &[usize],
    goal_idx: usize,
    _v_max: F,
) -> Trajectory<F> {
    let mut ids = Vec::new();
    let mut cur = parent[goal_idx];
    while cur != usize::MAX {
        ids.push(cur);
        cur = parent[cur];
    }
    ids.reverse();

    let mut traj = Trajectory::default();
    for &id in &ids {
        let t = start_time + g[id];
        let p = mtvg.position(id);
        if traj.waypoints().last().is_some_and(|w| w.t == t && w.p == p) {
            continue;
        }
        traj.push(t, p);
    }
    let goal_pos = mtvg.goal_motion.position(arrival);
    if !traj
        .waypoints()
        .last()
        .is_some_and(|w| w.t == arrival && w.p == goal_pos)
    {
        traj.push(arrival, goal_pos);
    }
    traj
}

/// Latest feasible departure time from window-node `u` such that the agent,
/// starting on `u`'s target at that time, reaches `arrive_point` by
/// `deadline`. Solved by planning in reversed time from
/// `(arrive_point, -deadline)` to the reversed image of `u`.
pub fn latest_departure_to_point<F: Real>(
    u_motion: &WindowMotion<F>,
    arrive_point: Point<F>,
    deadline: F,
    g: &VisibilityGraph<F>,
    inst: &Instance<F>,
) -> Option<F> {
    let reversed = u_motion.reversed();
    let mtvg = construct_mtvg(arrive_point, reversed, GoalVis::Fresh, g, inst);
    let result = astar(&mtvg, -deadline, inst, None);
    result.is_feasible().then(|| -result.arrival)
}

/// Reflected visible-interval column for reversed queries against window-node
/// `u_idx`: entry `q` is `{-t : t in vis(q, u)}`.
pub fn reversed_column<F: Real>(
    table: &VisibleIntervalTable<F>,
    g: &VisibilityGraph<F>,
    u_idx: usize,
) -> Vec<IntervalSet<F>> {
    (0..g.len()).map(|q| table.get(q, u_idx).reflect()).collect()
}

/// `LFDT(u, v)` for window-nodes of the scene (`v` must not be the depot;
/// depot-bound edges have their own rule in the time window graph). The
/// caller provides `u`'s reflected column so it can be shared across all `v`.
pub fn lfdt_with_column<F: Real>(
    u_idx: usize,
    v_idx: usize,
    column: &[IntervalSet<F>],
    scene: &Scene<F>,
    inst: &Instance<F>,
) -> Option<F> {
    let u = &scene.window_nodes[u_idx];
    let v = &scene.window_nodes[v_idx];
    debug_assert!(!v.is_depot(), "depot-bound edges use the reachability rule");
    debug_assert!(u_idx != v_idx);
    let reversed_goal = goal_motion_of(u, inst).reversed();
    let arrive_point = scene.graph.nodes[scene.graph.window_end_node[v_idx]];
    let mtvg = construct_mtvg(
        arrive_point,
        reversed_goal,
        GoalVis::Column(column),
        &scene.graph,
        inst,
    );
    let result = astar(&mtvg, -v.tf, inst, None);
    result.is_feasible().then(|| -result.arrival)
}

/// One-off `LFDT(u, v)`; builds the reflected column itself.
pub fn lfdt<F: Real>(
    u_idx: usize,
    v_idx: usize,
    scene: &Scene<F>,
    inst: &Instance<F>,
) -> Option<F> {
    let column = reversed_column(&scene.table, &scene.graph, u_idx);
    lfdt_with_column(u_idx, v_idx, &column, scene, inst)
}
