//! The static visibility graph and the visible-interval table: the shared
//! substrate every moving-target query is planned on.

use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::geometry::{segment_is_free, visible_sub_intervals, IntervalSet, Point, GEO_EPS};
use crate::model::{node_motion, window_nodes, Instance, WindowNode};
use crate::scalar::{real, OrdF, Real};

/// Visibility graph over convex obstacle vertices, the depot, and every
/// target's window-endpoint positions. Edges join mutually visible nodes and
/// carry Euclidean lengths.
#[derive(Clone, Debug)]
pub struct VisibilityGraph<F> {
    pub nodes: Vec<Point<F>>,
    pub adjacency: Vec<Vec<(usize, F)>>,
    pub depot_node: usize,
    /// Graph node holding each window-node's start position (index 0 = depot).
    pub window_start_node: Vec<usize>,
    /// Graph node holding each window-node's end position (index 0 = depot).
    pub window_end_node: Vec<usize>,
}

impl<F: Real> VisibilityGraph<F> {
    pub fn build(inst: &Instance<F>) -> Self {
        let nodes_tw = window_nodes(inst);
        let mut nodes: Vec<Point<F>> = Vec::new();
        let eps = real::<F>(GEO_EPS);
        let intern = |nodes: &mut Vec<Point<F>>, p: Point<F>| -> usize {
            match nodes.iter().position(|&q| q.dist(p) <= eps) {
                Some(i) => i,
                None => {
                    nodes.push(p);
                    nodes.len() - 1
                }
            }
        };
        for &v in &inst.obstacles.convex_vertices {
            intern(&mut nodes, v);
        }
        let depot_node = intern(&mut nodes, inst.depot);
        let mut window_start_node = vec![depot_node];
        let mut window_end_node = vec![depot_node];
        for node in nodes_tw.iter().skip(1) {
            let motion = node_motion(node, inst);
            window_start_node.push(intern(&mut nodes, motion.start_pos()));
            window_end_node.push(intern(&mut nodes, motion.end_pos()));
        }

        let obs = &inst.obstacles;
        let rows: Vec<Vec<(usize, F)>> = (0..nodes.len())
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                for j in 0..nodes.len() {
                    if i != j && segment_is_free(nodes[i], nodes[j], obs) {
                        row.push((j, nodes[i].dist(nodes[j])));
                    }
                }
                row
            })
            .collect();

        VisibilityGraph {
            nodes,
            adjacency: rows,
            depot_node,
            window_start_node,
            window_end_node,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Graph node ids visible from an arbitrary free point.
    pub fn visible_nodes(&self, p: Point<F>, inst: &Instance<F>) -> Vec<(usize, F)> {
        (0..self.nodes.len())
            .filter(|&i| segment_is_free(p, self.nodes[i], &inst.obstacles))
            .map(|i| (i, p.dist(self.nodes[i])))
            .collect()
    }

    /// Index of an existing node coinciding with `p`, if any.
    pub fn find_node(&self, p: Point<F>) -> Option<usize> {
        let eps = real::<F>(GEO_EPS);
        self.nodes.iter().position(|&q| q.dist(p) <= eps)
    }

    /// GraphViz dump for debugging.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph visibility {\n");
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [pos=\"{},{}\"];", p.x, p.y);
        }
        for (i, row) in self.adjacency.iter().enumerate() {
            for &(j, w) in row {
                if i < j {
                    let _ = writeln!(out, "  n{i} -- n{j} [len={w}];");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Dijkstra over an adjacency list; returns distances and parent pointers.
pub fn dijkstra<F: Real>(adjacency: &[Vec<(usize, F)>], source: usize) -> (Vec<F>, Vec<usize>) {
    let n = adjacency.len();
    let mut dist = vec![F::infinity(); n];
    let mut parent = vec![usize::MAX; n];
    let mut heap: BinaryHeap<(std::cmp::Reverse<OrdF<F>>, usize)> = BinaryHeap::new();
    dist[source] = F::zero();
    heap.push((std::cmp::Reverse(OrdF(F::zero())), source));
    while let Some((std::cmp::Reverse(d), u)) = heap.pop() {
        if d.0 > dist[u] {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
                parent[v] = u;
                heap.push((std::cmp::Reverse(OrdF(cand)), v));
            }
        }
    }
    (dist, parent)
}

/// Adjacency of the graph augmented with extra free points (appended after
/// the base nodes, in order). Extra points connect to every visible base node
/// and to each other.
pub fn augmented_adjacency<F: Real>(
    g: &VisibilityGraph<F>,
    inst: &Instance<F>,
    extra: &[Point<F>],
) -> Vec<Vec<(usize, F)>> {
    let base = g.len();
    let mut adj: Vec<Vec<(usize, F)>> = g.adjacency.clone();
    adj.resize(base + extra.len(), Vec::new());
    for (k, &p) in extra.iter().enumerate() {
        let idx = base + k;
        for (j, w) in g.visible_nodes(p, inst) {
            adj[idx].push((j, w));
            adj[j].push((idx, w));
        }
        for (m, &q) in extra.iter().enumerate().take(k) {
            if segment_is_free(p, q, &inst.obstacles) {
                let w = p.dist(q);
                adj[idx].push((base + m, w));
                adj[base + m].push((idx, w));
            }
        }
    }
    adj
}

/// Shortest obstacle-free path between two free points, via the graph.
/// Returns the polyline (including both endpoints) and its length.
pub fn shortest_spatial_path<F: Real>(
    from: Point<F>,
    to: Point<F>,
    g: &VisibilityGraph<F>,
    inst: &Instance<F>,
) -> Option<(Vec<Point<F>>, F)> {
    if segment_is_free(from, to, &inst.obstacles) {
        return Some((vec![from, to], from.dist(to)));
    }
    let adj = augmented_adjacency(g, inst, &[from, to]);
    let (src, dst) = (g.len(), g.len() + 1);
    let (dist, parent) = dijkstra(&adj, src);
    if !dist[dst].is_finite() {
        return None;
    }
    let mut ids = vec![dst];
    while *ids.last().unwrap() != src {
        ids.push(parent[*ids.last().unwrap()]);
    }
    ids.reverse();
    let all_points = |i: usize| {
        if i < g.len() {
            g.nodes[i]
        } else if i == src {
            from
        } else {
            to
        }
    };
    Some((ids.into_iter().map(all_points).collect(), dist[dst]))
}

/// Visible interval sets for every (graph node, window-node) pair.
///
/// Depot entries use the stationary-target convention: the whole of
/// `[0, +inf)` when the sight line to the depot is free, empty otherwise.
#[derive(Clone, Debug)]
pub struct VisibleIntervalTable<F> {
    entries: Vec<Vec<IntervalSet<F>>>,
}

impl<F: Real> VisibleIntervalTable<F> {
    pub fn build(inst: &Instance<F>, g: &VisibilityGraph<F>) -> Self {
        let nodes_tw = window_nodes(inst);
        let entries: Vec<Vec<IntervalSet<F>>> = g
            .nodes
            .par_iter()
            .map(|&q| {
                nodes_tw
                    .iter()
                    .map(|s| {
                        if s.is_depot() {
                            if segment_is_free(q, inst.depot, &inst.obstacles) {
                                IntervalSet::single(F::zero(), F::infinity())
                            } else {
                                IntervalSet::empty()
                            }
                        } else {
                            visible_sub_intervals(q, &node_motion(s, inst), &inst.obstacles)
                        }
                    })
                    .collect()
            })
            .collect();
        VisibleIntervalTable { entries }
    }

    /// `vis(q, s)` for graph node `q` and window-node index `s`.
    pub fn get(&self, q: usize, s: usize) -> &IntervalSet<F> {
        &self.entries[q][s]
    }

    pub fn window_node_count(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// CSV dump `q_id,s_id,lo,hi` with one row per interval.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q_id,s_id,lo,hi\n");
        for (q, row) in self.entries.iter().enumerate() {
            for (s, set) in row.iter().enumerate() {
                for iv in set.intervals() {
                    let _ = writeln!(out, "{q},{s},{},{}", iv.lo, iv.hi);
                }
            }
        }
        out
    }
}

/// Convenience bundle: graph, table, and window-nodes built from one instance.
#[derive(Clone, Debug)]
pub struct Scene<F> {
    pub graph: VisibilityGraph<F>,
    pub table: VisibleIntervalTable<F>,
    pub window_nodes: Vec<WindowNode<F>>,
}

impl<F: Real> Scene<F> {
    pub fn build(inst: &Instance<F>) -> Self {
        let graph = VisibilityGraph::build(inst);
        let table = VisibleIntervalTable::build(inst, &graph);
        Scene {
            graph,
            table,
            window_nodes: window_nodes(inst),
        }
    }
}
