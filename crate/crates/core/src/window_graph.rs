//! The time window graph: directed edges between window-nodes labeled with
//! latest feasible departure times.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::model::Instance;
use crate::planner::{lfdt_with_column, reversed_column};
use crate::scalar::Real;
use crate::visgraph::{dijkstra, Scene};

/// Directed graph over the scene's window-nodes. `edge(u, v)` holds
/// `LFDT(u, v)` when a connecting trajectory exists.
#[derive(Clone, Debug)]
pub struct TimeWindowGraph<F> {
    labels: Vec<Vec<Option<F>>>,
    /// `max_to_target[u][k]`: largest LFDT from `u` into any window of the
    /// k-th target (instance order), `-inf` when no edge exists.
    max_to_target: Vec<Vec<F>>,
}

impl<F: Real> TimeWindowGraph<F> {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn lfdt(&self, u: usize, v: usize) -> Option<F> {
        self.labels[u][v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.labels[u][v].is_some()
    }

    /// Max label over edges from `u` into any window-node of the target at
    /// instance index `target_idx`; `-inf` when there are none.
    pub fn max_lfdt_to_target(&self, u: usize, target_idx: usize) -> F {
        self.max_to_target[u][target_idx]
    }

    /// CSV dump `u,v,lfdt` of the present edges.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,lfdt\n");
        for (u, row) in self.labels.iter().enumerate() {
            for (v, label) in row.iter().enumerate() {
                if let Some(t) = label {
                    let _ = writeln!(out, "{u},{v},{t}");
                }
            }
        }
        out
    }
}

/// Builds the graph by evaluating LFDT for every ordered pair of distinct
/// window-nodes (same-target pairs are skipped: no successor rule ever uses
/// them). Edges into the depot use reachability: the label is the latest time
/// the departing target can still see some graph node from which the depot is
/// reachable, since the return leg has no deadline.
pub fn build_time_window_graph<F: Real>(
    inst: &Instance<F>,
    scene: &Scene<F>,
) -> TimeWindowGraph<F> {
    let n = scene.window_nodes.len();

    let labels: Vec<Vec<Option<F>>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let column = reversed_column(&scene.table, &scene.graph, u);
            let node_u = &scene.window_nodes[u];
            (0..n)
                .map(|v| {
                    if u == v {
                        return None;
                    }
                    let node_v = &scene.window_nodes[v];
                    if !node_u.is_depot() && node_u.target_id == node_v.target_id {
                        return None;
                    }
                    if node_v.is_depot() {
                        return latest_depot_return_departure(u, scene);
                    }
                    lfdt_with_column(u, v, &column, scene, inst)
                })
                .collect()
        })
        .collect();

    let max_to_target: Vec<Vec<F>> = labels
        .iter()
        .map(|row| {
            inst.targets
                .iter()
                .map(|target| {
                    scene
                        .window_nodes
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.target_id == target.id)
                        .filter_map(|(v, _)| row[v])
                        .fold(F::neg_infinity(), F::max)
                })
                .collect()
        })
        .collect();

    TimeWindowGraph {
        labels,
        max_to_target,
    }
}

/// Latest time at which window-node `u`'s target can still see some graph
/// node from which the depot is reachable: the return leg has no deadline, so
/// this is the label of the `(u, depot)` edge. `None` when the depot can
/// never be reached from `u`.
pub fn latest_depot_return_departure<F: Real>(u: usize, scene: &Scene<F>) -> Option<F> {
    let (dist_from_depot, _) = dijkstra(&scene.graph.adjacency, scene.graph.depot_node);
    (0..scene.graph.len())
        .filter(|&q| dist_from_depot[q].is_finite())
        .filter_map(|q| scene.table.get(q, u).max())
        .fold(None, |acc: Option<F>, hi| {
            Some(acc.map_or(hi, |a| a.max(hi)))
        })
}
