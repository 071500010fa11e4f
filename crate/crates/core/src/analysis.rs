//! Instance-difficulty analysis: per-target usable intervals (times at which
//! some feasible tour intercepts the target) and the minimum usable fraction,
//! computed by enumerating feasible window-node sequences and chaining
//! earliest-arrival / latest-departure searches along each.

use thiserror::Error;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{Interval, IntervalSet};
use crate::model::{target_position, Instance};
use crate::planner::{
    goal_motion_of, latest_departure_to_point, point_to_moving_target_search,
};
use crate::scalar::Real;
use crate::visgraph::Scene;
use crate::window_graph::{latest_depot_return_departure, TimeWindowGraph};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{n_targets} targets exceed the sequence-enumeration cap of {cap}")]
    CapExceeded { n_targets: usize, cap: usize },
    #[error("instance is infeasible; usable fractions are undefined")]
    Infeasible,
    #[error("sequence is not feasible end-to-end")]
    InfeasibleSequence,
}

/// Usable intervals and fraction for one target.
#[derive(Clone, Debug, Serialize)]
pub struct TargetUsable<F> {
    pub target_id: u32,
    pub intervals: IntervalSet<F>,
    pub fraction: F,
}

/// Whole-instance usability report.
#[derive(Clone, Debug, Serialize)]
pub struct UsableReport<F> {
    pub per_target: Vec<TargetUsable<F>>,
    pub min_fraction: F,
    /// True when some sequence's latest interception time was clamped by the
    /// depot-return reachability requirement rather than a window end.
    pub return_clamped: bool,
}

/// All window-node sequences (one node per target, any order) for which
/// chaining earliest-arrival searches succeeds end to end, including the
/// return to the depot. Sequences are lists of scene window-node indices.
pub fn enumerate_feasible_sequences<F: Real>(
    inst: &Instance<F>,
    scene: &Scene<F>,
    gtw: &TimeWindowGraph<F>,
    cap: usize,
) -> Result<Vec<Vec<usize>>, AnalysisError> {
    let n = inst.targets.len();
    if n > cap {
        return Err(AnalysisError::CapExceeded { n_targets: n, cap });
    }
    if n == 0 {
        // The empty tour needs no legs at all.
        return Ok(vec![Vec::new()]);
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    let mut visited = vec![false; n];
    recurse(
        inst,
        scene,
        gtw,
        &mut prefix,
        &mut visited,
        inst.depot,
        F::zero(),
        0,
        &mut out,
    );
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Real>(
    inst: &Instance<F>,
    scene: &Scene<F>,
    gtw: &TimeWindowGraph<F>,
    prefix: &mut Vec<usize>,
    visited: &mut [bool],
    pos: crate::geometry::Point<F>,
    time: F,
    last_node: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == visited.len() {
        if gtw
            .lfdt(last_node, 0)
            .is_some_and(|l| time <= l)
        {
            out.push(prefix.clone());
        }
        return;
    }
    for v in 1..scene.window_nodes.len() {
        let s = &scene.window_nodes[v];
        let target_idx = inst
            .targets
            .iter()
            .position(|t| t.id == s.target_id)
            .expect("known target");
        if visited[target_idx] {
            continue;
        }
        // The LFDT gate is exact: a connecting trajectory exists iff the
        // current time has not passed it.
        if !gtw.lfdt(last_node, v).is_some_and(|l| time <= l) {
            continue;
        }
        let plan = point_to_moving_target_search(pos, time, v, scene, inst);
        let Some(traj) = plan.trajectory else { continue };
        let arrival = plan.arrival;
        let end = traj.last().p;
        visited[target_idx] = true;
        prefix.push(v);
        recurse(inst, scene, gtw, prefix, visited, end, arrival, v, out);
        prefix.pop();
        visited[target_idx] = false;
    }
}

/// Earliest/latest interception times per position of a feasible sequence:
/// forward earliest-arrival chaining from the depot, then backward
/// latest-departure chaining seeded at the final window's end (clamped so a
/// depot return still exists).
pub fn sequence_usable_intervals<F: Real>(
    seq: &[usize],
    inst: &Instance<F>,
    scene: &Scene<F>,
) -> Result<(Vec<Interval<F>>, bool), AnalysisError> {
    let n = seq.len();
    assert!(n > 0);

    let mut earliest = Vec::with_capacity(n);
    let mut pos = inst.depot;
    let mut time = F::zero();
    for &v in seq {
        let plan = point_to_moving_target_search(pos, time, v, scene, inst);
        let Some(traj) = plan.trajectory else {
            return Err(AnalysisError::InfeasibleSequence);
        };
        time = plan.arrival;
        pos = traj.last().p;
        earliest.push(time);
    }

    let mut latest = vec![F::zero(); n];
    let last = seq[n - 1];
    let window_end = scene.window_nodes[last].tf;
    let return_cap =
        latest_depot_return_departure(last, scene).ok_or(AnalysisError::InfeasibleSequence)?;
    latest[n - 1] = window_end.min(return_cap);
    let mut return_clamped = return_cap < window_end;
    for i in (1..n).rev() {
        let u = &scene.window_nodes[seq[i - 1]];
        let next = &scene.window_nodes[seq[i]];
        let arrive_point = target_position(next, latest[i], inst);
        let u_motion = goal_motion_of(u, inst);
        let dep = latest_departure_to_point(
            &u_motion,
            arrive_point,
            latest[i],
            &scene.graph,
            inst,
        )
        .ok_or(AnalysisError::InfeasibleSequence)?;
        latest[i - 1] = dep;
    }

    let mut intervals = Vec::with_capacity(n);
    for i in 0..n {
        if earliest[i] > latest[i] {
            // Feasible sequences admit a nonempty corridor; tolerate only
            // rounding-level inversions.
            if earliest[i] - latest[i] > crate::scalar::real(1e-6) {
                return Err(AnalysisError::InfeasibleSequence);
            }
            intervals.push(Interval::new(latest[i], latest[i]));
        } else {
            intervals.push(Interval::new(earliest[i], latest[i]));
        }
    }
    Ok((intervals, return_clamped))
}

/// Merges sequence-specific usable intervals across all feasible sequences
/// into maximal usable intervals and fractions per target.
pub fn usable_fraction<F: Real>(
    inst: &Instance<F>,
    scene: &Scene<F>,
    gtw: &TimeWindowGraph<F>,
    cap: usize,
) -> Result<UsableReport<F>, AnalysisError> {
    let sequences = enumerate_feasible_sequences(inst, scene, gtw, cap)?;
    if sequences.is_empty() {
        return Err(AnalysisError::Infeasible);
    }
    let results: Vec<(Vec<Interval<F>>, bool, &Vec<usize>)> = sequences
        .par_iter()
        .map(|seq| {
            let (ivs, clamped) =
                sequence_usable_intervals(seq, inst, scene).expect("enumerated sequence");
            (ivs, clamped, seq)
        })
        .collect();

    let mut pieces: Vec<Vec<Interval<F>>> = vec![Vec::new(); inst.targets.len()];
    let mut return_clamped = false;
    for (ivs, clamped, seq) in results {
        return_clamped |= clamped;
        for (iv, &v) in ivs.iter().zip(seq.iter()) {
            let target_idx = inst
                .targets
                .iter()
                .position(|t| t.id == scene.window_nodes[v].target_id)
                .expect("known target");
            pieces[target_idx].push(*iv);
        }
    }

    let mut per_target = Vec::with_capacity(inst.targets.len());
    let mut min_fraction = F::infinity();
    for (target, ivs) in inst.targets.iter().zip(pieces) {
        let merged = IntervalSet::from_pieces(ivs);
        let window_total: F = target
            .windows
            .iter()
            .fold(F::zero(), |acc, w| acc + w.length());
        let fraction = (merged.total_length() / window_total).min(F::one());
        min_fraction = min_fraction.min(fraction);
        per_target.push(TargetUsable {
            target_id: target.id,
            intervals: merged,
            fraction,
        });
    }
    Ok(UsableReport {
        per_target,
        min_fraction,
        return_clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ObstacleSet, Point};
    use crate::model::{Target, TargetWindow};
    use crate::window_graph::build_time_window_graph;

    fn pt(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn stationary(id: u32, p: Point<f64>, t0: f64, tf: f64) -> Target<f64> {
        Target {
            id,
            windows: vec![TargetWindow {
                t0,
                tf,
                p0: p,
                vel: pt(0.0, 0.0),
            }],
        }
    }

    fn build(inst: &Instance<f64>) -> (Scene<f64>, TimeWindowGraph<f64>) {
        let scene = Scene::build(inst);
        let gtw = build_time_window_graph(inst, &scene);
        (scene, gtw)
    }

    #[test]
    fn zero_targets_single_empty_sequence() {
        let inst = Instance::new(ObstacleSet::empty(), pt(0.0, 0.0), 1.0, vec![]).unwrap();
        let (scene, gtw) = build(&inst);
        let seqs = enumerate_feasible_sequences(&inst, &scene, &gtw, 10).unwrap();
        assert_eq!(seqs, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn single_reachable_target_one_sequence() {
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![stationary(1, pt(1.0, 0.0), 0.0, 10.0)],
        )
        .unwrap();
        let (scene, gtw) = build(&inst);
        let seqs = enumerate_feasible_sequences(&inst, &scene, &gtw, 10).unwrap();
        assert_eq!(seqs, vec![vec![1]]);
    }

    #[test]
    fn three_targets_match_brute_force_orderings() {
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![
                stationary(1, pt(2.0, 0.0), 0.0, 3.0),
                stationary(2, pt(4.0, 0.0), 0.0, 6.0),
                stationary(3, pt(6.0, 0.0), 0.0, 20.0),
            ],
        )
        .unwrap();
        let (scene, gtw) = build(&inst);
        let seqs = enumerate_feasible_sequences(&inst, &scene, &gtw, 10).unwrap();
        // Distances force the 1 -> 2 -> 3 order only.
        assert_eq!(seqs, vec![vec![1, 2, 3]]);
        let cap_err = enumerate_feasible_sequences(&inst, &scene, &gtw, 2);
        assert!(matches!(cap_err, Err(AnalysisError::CapExceeded { .. })));
    }

    #[test]
    fn co_located_target_full_window_usable() {
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![stationary(1, pt(0.0, 0.0), 0.0, 5.0)],
        )
        .unwrap();
        let (scene, gtw) = build(&inst);
        let (ivs, clamped) = sequence_usable_intervals(&[1], &inst, &scene).unwrap();
        assert_eq!(ivs, vec![Interval::new(0.0, 5.0)]);
        assert!(!clamped);
        let report = usable_fraction(&inst, &scene, &gtw, 10).unwrap();
        assert_eq!(report.min_fraction, 1.0);
    }

    #[test]
    fn chained_line_matches_departure_scan() {
        // Two stationary targets on a line; usable windows are constrained
        // by travel both ways.
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![
                stationary(1, pt(3.0, 0.0), 0.0, 10.0),
                stationary(2, pt(6.0, 0.0), 0.0, 10.0),
            ],
        )
        .unwrap();
        let (scene, _) = build(&inst);
        let (ivs, _) = sequence_usable_intervals(&[1, 2], &inst, &scene).unwrap();
        // Earliest: reach (3,0) at 3; then (6,0) at 6.
        // Latest: t_L for target 2 is 10; target 1 must leave by 10 - 3 = 7.
        assert!((ivs[0].lo - 3.0).abs() < 1e-9);
        assert!((ivs[0].hi - 7.0).abs() < 1e-9);
        assert!((ivs[1].lo - 6.0).abs() < 1e-9);
        assert!((ivs[1].hi - 10.0).abs() < 1e-9);
        // Dense scan oracle for target 1's latest departure.
        let step = 1e-3;
        let mut latest = None;
        let mut t = 10.0;
        while t >= 0.0 {
            // Intercept 1 at t, then 2 by 10 (distance 3).
            if t + 3.0 <= 10.0 {
                latest = Some(t);
                break;
            }
            t -= step;
        }
        assert!((ivs[0].hi - latest.unwrap()).abs() <= step + 1e-9);
    }

    #[test]
    fn sliver_window_fraction_near_zero() {
        // Target reachable only in the last instants of a long window.
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![stationary(1, pt(9.999, 0.0), 0.0, 10.0)],
        )
        .unwrap();
        let (scene, gtw) = build(&inst);
        let report = usable_fraction(&inst, &scene, &gtw, 10).unwrap();
        assert!(report.min_fraction < 1e-3);
    }

    #[test]
    fn infeasible_instance_is_an_error() {
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![stationary(1, pt(100.0, 0.0), 0.0, 1.0)],
        )
        .unwrap();
        let (scene, gtw) = build(&inst);
        assert!(matches!(
            usable_fraction(&inst, &scene, &gtw, 10),
            Err(AnalysisError::Infeasible)
        ));
    }

    #[test]
    fn interception_times_of_solutions_lie_in_usable_intervals() {
        use crate::tour_search::{dfs_solve, DfsOptions};
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![
                stationary(1, pt(2.0, 1.0), 0.0, 12.0),
                stationary(2, pt(-1.0, 3.0), 2.0, 14.0),
            ],
        )
        .unwrap();
        let (scene, gtw) = build(&inst);
        let report = usable_fraction(&inst, &scene, &gtw, 10).unwrap();
        let (outcome, _) = dfs_solve(&inst, &scene, &gtw, &DfsOptions::default());
        let sol = outcome.solution().unwrap();
        for itc in &sol.interceptions {
            let entry = report
                .per_target
                .iter()
                .find(|t| t.target_id == itc.target)
                .unwrap();
            assert!(
                entry
                    .intervals
                    .intervals()
                    .iter()
                    .any(|iv| iv.lo - 1e-9 <= itc.time && itc.time <= iv.hi + 1e-9),
                "interception of {} at {} outside usable set {:?}",
                itc.target,
                itc.time,
                entry.intervals
            );
        }
    }

    #[test]
    fn widening_windows_never_shrinks_fractions() {
        let narrow = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![
                stationary(1, pt(3.0, 0.0), 2.0, 8.0),
                stationary(2, pt(0.0, 4.0), 4.0, 12.0),
            ],
        )
        .unwrap();
        let wide = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![
                stationary(1, pt(3.0, 0.0), 1.0, 9.0),
                stationary(2, pt(0.0, 4.0), 3.0, 13.0),
            ],
        )
        .unwrap();
        let (scene_n, gtw_n) = build(&narrow);
        let (scene_w, gtw_w) = build(&wide);
        let rep_n = usable_fraction(&narrow, &scene_n, &gtw_n, 10).unwrap();
        let rep_w = usable_fraction(&wide, &scene_w, &gtw_w, 10).unwrap();
        // Absolute usable time never shrinks when windows widen.
        for (a, b) in rep_n.per_target.iter().zip(&rep_w.per_target) {
            assert!(b.intervals.total_length() >= a.intervals.total_length() - 1e-9);
        }
    }
}
