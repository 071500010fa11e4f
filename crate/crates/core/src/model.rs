//! Problem instances, trajectories, window-nodes, and solution validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    load_occupancy_grid, point_in_interior, segment_is_free, GridError, ObstacleSet, Point,
    WindowMotion,
};
use crate::scalar::{real, Real};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("bad instance/solution file: {0}")]
    Json(#[from] serde_json::Error),
}

/// One time window of a target: linear motion `p0 + vel * (t - t0)` on `[t0, tf]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TargetWindow<F> {
    pub t0: F,
    pub tf: F,
    pub p0: Point<F>,
    pub vel: Point<F>,
}

impl<F: Real> TargetWindow<F> {
    pub fn motion(&self) -> WindowMotion<F> {
        WindowMotion::new(self.p0, self.vel, self.t0, self.tf)
    }

    pub fn position(&self, t: F) -> Point<F> {
        self.p0.add(self.vel.scale(t - self.t0))
    }

    pub fn length(&self) -> F {
        self.tf - self.t0
    }
}

/// A target and its windows, sorted by start time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Target<F> {
    pub id: u32,
    pub windows: Vec<TargetWindow<F>>,
}

/// Grid description kept alongside the derived obstacle polygons so instances
/// can be written back out unchanged.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec<F> {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: F,
    pub occupied: Vec<[usize; 2]>,
}

impl<F: Real> GridSpec<F> {
    pub fn to_obstacles(&self) -> Result<ObstacleSet<F>, GridError> {
        let cells: Vec<(usize, usize)> = self.occupied.iter().map(|&[r, c]| (r, c)).collect();
        load_occupancy_grid(self.rows, self.cols, self.cell_size, &cells)
    }

    pub fn width(&self) -> F {
        real::<F>(self.cols as f64) * self.cell_size
    }

    pub fn height(&self) -> F {
        real::<F>(self.rows as f64) * self.cell_size
    }
}

/// An MT-TSP-O problem instance.
#[derive(Clone, Debug)]
pub struct Instance<F> {
    pub obstacles: ObstacleSet<F>,
    pub grid: Option<GridSpec<F>>,
    pub depot: Point<F>,
    pub v_max: F,
    pub targets: Vec<Target<F>>,
}

impl<F: Real> Instance<F> {
    /// Builds and validates an instance over free-form obstacle polygons.
    pub fn new(
        obstacles: ObstacleSet<F>,
        depot: Point<F>,
        v_max: F,
        targets: Vec<Target<F>>,
    ) -> Result<Self, ModelError> {
        let inst = Instance {
            obstacles,
            grid: None,
            depot,
            v_max,
            targets,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub fn target_by_id(&self, id: u32) -> Option<&Target<F>> {
        self.targets.iter().find(|t| t.id == id)
    }

    /// Spatial extent used to scale relative tolerances: the diagonal of the
    /// bounding box of everything in the instance, floored at 1.
    pub fn diameter(&self) -> F {
        let mut lo = self.depot;
        let mut hi = self.depot;
        let mut grow = |p: Point<F>| {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        };
        for poly in &self.obstacles.polygons {
            for &p in poly {
                grow(p);
            }
        }
        for t in &self.targets {
            for w in &t.windows {
                grow(w.p0);
                grow(w.position(w.tf));
            }
        }
        hi.dist(lo).max(F::one())
    }

    fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: String| Err(ModelError::InvalidInstance(msg));
        if !(self.v_max > F::zero()) || !self.v_max.is_finite() {
            return fail(format!("v_max must be positive and finite, got {}", self.v_max));
        }
        if !self.depot.is_finite() {
            return fail("depot coordinates must be finite".into());
        }
        if point_in_interior(self.depot, &self.obstacles) {
            return fail("depot lies inside an obstacle".into());
        }
        let speed_tol = self.v_max * real::<F>(1.0 + 1e-9);
        for (i, t) in self.targets.iter().enumerate() {
            if t.id == 0 {
                return fail("target id 0 is reserved for the depot".into());
            }
            if self.targets[..i].iter().any(|u| u.id == t.id) {
                return fail(format!("duplicate target id {}", t.id));
            }
            if t.windows.is_empty() {
                return fail(format!("target {} has no windows", t.id));
            }
            for (j, w) in t.windows.iter().enumerate() {
                if !(w.t0 < w.tf) || !w.t0.is_finite() || !w.tf.is_finite() {
                    return fail(format!("target {} window {j} has bad bounds", t.id));
                }
                if !w.p0.is_finite() || !w.vel.is_finite() {
                    return fail(format!("target {} window {j} has non-finite motion", t.id));
                }
                if w.vel.norm() > speed_tol {
                    return fail(format!(
                        "target {} window {j} moves faster than v_max",
                        t.id
                    ));
                }
                if j > 0 && w.t0 < t.windows[j - 1].tf {
                    return fail(format!("target {} windows overlap or are unsorted", t.id));
                }
                if !segment_is_free(w.p0, w.position(w.tf), &self.obstacles) {
                    return fail(format!(
                        "target {} window {j} sweeps through an obstacle",
                        t.id
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A pairing of a target with one of its time windows; the node currency of
/// the time window graph and of every goal query. `target_id == 0` is the
/// depot node with window `[0, +inf)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowNode<F> {
    pub target_id: u32,
    pub window_index: usize,
    pub t0: F,
    pub tf: F,
}

impl<F: Real> WindowNode<F> {
    pub fn depot() -> Self {
        WindowNode {
            target_id: 0,
            window_index: 0,
            t0: F::zero(),
            tf: F::infinity(),
        }
    }

    pub fn is_depot(&self) -> bool {
        self.target_id == 0
    }

    pub fn targ(&self) -> u32 {
        self.target_id
    }

    pub fn t0(&self) -> F {
        self.t0
    }

    pub fn tf(&self) -> F {
        self.tf
    }
}

/// All window-nodes of an instance: the depot node first, then one node per
/// (target, window) in (target, t0) order.
pub fn window_nodes<F: Real>(inst: &Instance<F>) -> Vec<WindowNode<F>> {
    let mut nodes = vec![WindowNode::depot()];
    for t in &inst.targets {
        for (j, w) in t.windows.iter().enumerate() {
            nodes.push(WindowNode {
                target_id: t.id,
                window_index: j,
                t0: w.t0,
                tf: w.tf,
            });
        }
    }
    nodes
}

/// Position of a window-node's target at time `t`; `t` must lie inside the
/// node's window.
pub fn target_position<F: Real>(node: &WindowNode<F>, t: F, inst: &Instance<F>) -> Point<F> {
    debug_assert!(
        t >= node.t0 && t <= node.tf,
        "query time outside window-node span"
    );
    if node.is_depot() {
        return inst.depot;
    }
    let target = inst
        .target_by_id(node.target_id)
        .expect("window-node refers to a known target");
    target.windows[node.window_index].position(t)
}

/// The window motion backing a non-depot window-node.
pub fn node_motion<F: Real>(node: &WindowNode<F>, inst: &Instance<F>) -> WindowMotion<F> {
    debug_assert!(!node.is_depot());
    inst.target_by_id(node.target_id).expect("known target").windows[node.window_index].motion()
}

/// A timed waypoint; the agent moves linearly between consecutive waypoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint<F> {
    pub t: F,
    pub p: Point<F>,
}

/// A timed polyline for the agent. Equal consecutive positions encode waiting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory<F> {
    waypoints: Vec<Waypoint<F>>,
}

impl<F: Real> Trajectory<F> {
    pub fn new(waypoints: Vec<Waypoint<F>>) -> Self {
        debug_assert!(
            waypoints.windows(2).all(|w| w[0].t <= w[1].t),
            "waypoint times must be nondecreasing"
        );
        Trajectory { waypoints }
    }

    pub fn single(t: F, p: Point<F>) -> Self {
        Trajectory {
            waypoints: vec![Waypoint { t, p }],
        }
    }

    pub fn waypoints(&self) -> &[Waypoint<F>] {
        &self.waypoints
    }

    pub fn first(&self) -> &Waypoint<F> {
        self.waypoints.first().expect("non-empty trajectory")
    }

    pub fn last(&self) -> &Waypoint<F> {
        self.waypoints.last().expect("non-empty trajectory")
    }

    pub fn final_time(&self) -> F {
        self.last().t
    }

    /// Appends a straight leg ending at `(t, p)`.
    pub fn push(&mut self, t: F, p: Point<F>) {
        debug_assert!(self.waypoints.is_empty() || t >= self.final_time());
        self.waypoints.push(Waypoint { t, p });
    }

    /// Position at time `t`, clamped to the trajectory's time span.
    pub fn position_at(&self, t: F) -> Point<F> {
        let wps = &self.waypoints;
        if t <= wps[0].t {
            return wps[0].p;
        }
        if t >= self.final_time() {
            return self.last().p;
        }
        let idx = wps.partition_point(|w| w.t <= t);
        let (a, b) = (&wps[idx - 1], &wps[idx]);
        let dt = b.t - a.t;
        if dt == F::zero() {
            return a.p;
        }
        let u = (t - a.t) / dt;
        a.p.add(b.p.sub(a.p).scale(u))
    }

    pub fn legs(&self) -> impl Iterator<Item = (&Waypoint<F>, &Waypoint<F>)> {
        self.waypoints.windows(2).map(|w| (&w[0], &w[1]))
    }

    pub fn spatial_length(&self) -> F {
        self.legs().fold(F::zero(), |acc, (a, b)| acc + a.p.dist(b.p))
    }
}

/// An interception of one target inside one of its windows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interception<F> {
    pub target: u32,
    pub window_index: usize,
    pub time: F,
}

/// A complete MT-TSP-O solution: depot-to-depot trajectory plus the window
/// sequence it intercepts.
#[derive(Clone, Debug)]
pub struct Solution<F> {
    pub trajectory: Trajectory<F>,
    pub final_time: F,
    pub interceptions: Vec<Interception<F>>,
}

/// One validator check with a human-readable reason on failure.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of validating a solution against an instance.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn add(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail,
        });
    }
}

/// Checks a candidate solution: speed limit on every leg, obstacle clearance
/// of every leg, depot start/end at t = 0 and `final_time`, and one in-window
/// interception per target. `tol` is relative; positions compare within
/// `tol * diameter`, times within `tol * (1 + final_time)`.
pub fn validate_solution<F: Real>(
    inst: &Instance<F>,
    sol: &Solution<F>,
    tol: F,
) -> ValidationReport {
    let mut report = ValidationReport { checks: Vec::new() };
    let scale = inst.diameter();
    let pos_tol = tol * scale;
    let time_tol = tol * (F::one() + sol.final_time.abs());
    let wps = sol.trajectory.waypoints();

    if wps.is_empty() {
        report.add("trajectory", false, "empty trajectory".into());
        return report;
    }

    let start = sol.trajectory.first();
    let end = sol.trajectory.last();
    report.add(
        "starts_at_depot",
        start.t.abs() <= time_tol && start.p.dist(inst.depot) <= pos_tol,
        format!("start t={} p=({}, {})", start.t, start.p.x, start.p.y),
    );
    report.add(
        "ends_at_depot",
        end.p.dist(inst.depot) <= pos_tol,
        format!("end p=({}, {})", end.p.x, end.p.y),
    );
    report.add(
        "final_time",
        (end.t - sol.final_time).abs() <= time_tol,
        format!("last waypoint t={} vs final_time={}", end.t, sol.final_time),
    );

    let speed_cap = inst.v_max * (F::one() + tol);
    let mut speed_ok = true;
    let mut speed_detail = String::new();
    let mut order_ok = true;
    for (a, b) in sol.trajectory.legs() {
        let dt = b.t - a.t;
        let dp = b.p.dist(a.p);
        if dt < F::zero() {
            order_ok = false;
        }
        let bad = if dt == F::zero() {
            dp > pos_tol
        } else {
            dp / dt > speed_cap
        };
        if bad && speed_ok {
            speed_ok = false;
            speed_detail = format!("leg at t={} moves {} in {}", a.t, dp, dt);
        }
    }
    report.add("waypoint_order", order_ok, String::new());
    report.add("speed_limit", speed_ok, speed_detail);

    let mut free_ok = true;
    let mut free_detail = String::new();
    for (a, b) in sol.trajectory.legs() {
        if !segment_is_free(a.p, b.p, &inst.obstacles) {
            free_ok = false;
            free_detail = format!(
                "leg ({}, {}) -> ({}, {}) crosses an obstacle",
                a.p.x, a.p.y, b.p.x, b.p.y
            );
            break;
        }
    }
    report.add("obstacle_free", free_ok, free_detail);

    for target in &inst.targets {
        let name = format!("intercepts_target_{}", target.id);
        let claim = sol.interceptions.iter().find(|i| i.target == target.id);
        match claim {
            None => report.add(&name, false, "no interception recorded".into()),
            Some(i) => match target.windows.get(i.window_index) {
                None => report.add(&name, false, format!("bad window index {}", i.window_index)),
                Some(w) => {
                    let in_window = i.time >= w.t0 - time_tol && i.time <= w.tf + time_tol;
                    let gap = sol.trajectory.position_at(i.time).dist(w.position(i.time));
                    report.add(
                        &name,
                        in_window && gap <= pos_tol,
                        format!("t={} window=[{}, {}] miss={}", i.time, w.t0, w.tf, gap),
                    );
                }
            },
        }
    }
    report
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceFile<F> {
    v_max: F,
    depot: [F; 2],
    grid: GridSpecFile<F>,
    targets: Vec<TargetFile<F>>,
}

#[derive(Serialize, Deserialize)]
struct GridSpecFile<F> {
    rows: usize,
    cols: usize,
    cell_size: F,
    occupied: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
struct TargetFile<F> {
    id: u32,
    windows: Vec<WindowFile<F>>,
}

#[derive(Serialize, Deserialize)]
struct WindowFile<F> {
    t0: F,
    tf: F,
    p0: [F; 2],
    vel: [F; 2],
}

impl<F: Real + Serialize + for<'de> Deserialize<'de>> Instance<F> {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: InstanceFile<F> = serde_json::from_str(text)?;
        let grid = GridSpec {
            rows: file.grid.rows,
            cols: file.grid.cols,
            cell_size: file.grid.cell_size,
            occupied: file.grid.occupied,
        };
        let obstacles = grid.to_obstacles()?;
        let targets = file
            .targets
            .into_iter()
            .map(|t| Target {
                id: t.id,
                windows: t
                    .windows
                    .into_iter()
                    .map(|w| TargetWindow {
                        t0: w.t0,
                        tf: w.tf,
                        p0: Point::new(w.p0[0], w.p0[1]),
                        vel: Point::new(w.vel[0], w.vel[1]),
                    })
                    .collect(),
            })
            .collect();
        let inst = Instance {
            obstacles,
            grid: Some(grid),
            depot: Point::new(file.depot[0], file.depot[1]),
            v_max: file.v_max,
            targets,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let grid = self.grid.as_ref().ok_or_else(|| {
            ModelError::InvalidInstance("only grid-backed instances can be serialized".into())
        })?;
        let file = InstanceFile {
            v_max: self.v_max,
            depot: [self.depot.x, self.depot.y],
            grid: GridSpecFile {
                rows: grid.rows,
                cols: grid.cols,
                cell_size: grid.cell_size,
                occupied: grid.occupied.clone(),
            },
            targets: self
                .targets
                .iter()
                .map(|t| TargetFile {
                    id: t.id,
                    windows: t
                        .windows
                        .iter()
                        .map(|w| WindowFile {
                            t0: w.t0,
                            tf: w.tf,
                            p0: [w.p0.x, w.p0.y],
                            vel: [w.vel.x, w.vel.y],
                        })
                        .collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SolutionFile<F> {
    final_time: F,
    waypoints: Vec<[F; 3]>,
    interceptions: Vec<Interception<F>>,
}

impl<F: Real + Serialize + for<'de> Deserialize<'de>> Solution<F> {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: SolutionFile<F> = serde_json::from_str(text)?;
        let waypoints = file
            .waypoints
            .into_iter()
            .map(|[t, x, y]| Waypoint {
                t,
                p: Point::new(x, y),
            })
            .collect();
        Ok(Solution {
            trajectory: Trajectory::new(waypoints),
            final_time: file.final_time,
            interceptions: file.interceptions,
        })
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let file = SolutionFile {
            final_time: self.final_time,
            waypoints: self
                .trajectory
                .waypoints()
                .iter()
                .map(|w| [w.t, w.p.x, w.p.y])
                .collect(),
            interceptions: self.interceptions.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn stationary_target(id: u32, p: Point<f64>, t0: f64, tf: f64) -> Target<f64> {
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

    fn empty_instance() -> Instance<f64> {
        Instance::new(ObstacleSet::empty(), pt(0.0, 0.0), 1.0, vec![]).unwrap()
    }

    #[test]
    fn window_nodes_depot_only() {
        let inst = empty_instance();
        let nodes = window_nodes(&inst);
        assert_eq!(nodes.len(), 1);
        assert!(nodes[0].is_depot());
        assert_eq!(nodes[0].tf, f64::INFINITY);
    }

    #[test]
    fn window_nodes_counts() {
        let two_windows = |id: u32| Target {
            id,
            windows: vec![
                TargetWindow {
                    t0: 0.0,
                    tf: 1.0,
                    p0: pt(1.0, 0.0),
                    vel: pt(0.0, 0.0),
                },
                TargetWindow {
                    t0: 2.0,
                    tf: 3.0,
                    p0: pt(1.0, 0.0),
                    vel: pt(0.0, 0.0),
                },
            ],
        };
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![two_windows(1), two_windows(2)],
        )
        .unwrap();
        assert_eq!(window_nodes(&inst).len(), 5);
    }

    #[test]
    fn window_nodes_experiment_two_scale() {
        // 10 targets with 6 windows each: 61 nodes including the depot.
        let targets: Vec<Target<f64>> = (1..=10)
            .map(|id| Target {
                id,
                windows: (0..6)
                    .map(|j| TargetWindow {
                        t0: 10.0 * j as f64,
                        tf: 10.0 * j as f64 + 5.0,
                        p0: pt(id as f64, 0.0),
                        vel: pt(0.0, 0.0),
                    })
                    .collect(),
            })
            .collect();
        let inst = Instance::new(ObstacleSet::empty(), pt(0.0, 0.0), 1.0, targets).unwrap();
        assert_eq!(window_nodes(&inst).len(), 61);
    }

    #[test]
    fn target_position_linear_and_depot() {
        let target = Target {
            id: 1,
            windows: vec![TargetWindow {
                t0: 2.0,
                tf: 6.0,
                p0: pt(1.0, 0.0),
                vel: pt(1.0, 0.0),
            }],
        };
        let inst =
            Instance::new(ObstacleSet::empty(), pt(5.0, 5.0), 2.0, vec![target]).unwrap();
        let nodes = window_nodes(&inst);
        assert_eq!(target_position(&nodes[0], 17.0, &inst), pt(5.0, 5.0));
        assert_eq!(target_position(&nodes[1], 4.0, &inst), pt(3.0, 0.0));
        assert_eq!(target_position(&nodes[1], 6.0, &inst), pt(5.0, 0.0));
    }

    #[test]
    fn instance_rejects_overspeed_window() {
        let target = Target {
            id: 1,
            windows: vec![TargetWindow {
                t0: 0.0,
                tf: 1.0,
                p0: pt(0.0, 0.0),
                vel: pt(3.0, 0.0),
            }],
        };
        let err = Instance::new(ObstacleSet::empty(), pt(0.0, 0.0), 1.0, vec![target]);
        assert!(err.is_err());
    }

    #[test]
    fn instance_rejects_window_through_obstacle() {
        let obs = ObstacleSet::from_loops(vec![vec![
            pt(1.0, -0.5),
            pt(2.0, -0.5),
            pt(2.0, 0.5),
            pt(1.0, 0.5),
        ]]);
        let target = Target {
            id: 1,
            windows: vec![TargetWindow {
                t0: 0.0,
                tf: 4.0,
                p0: pt(0.0, 0.0),
                vel: pt(1.0, 0.0),
            }],
        };
        let err = Instance::new(obs, pt(0.0, -2.0), 2.0, vec![target]);
        assert!(err.is_err());
    }

    #[test]
    fn validate_trivial_solution() {
        let inst = empty_instance();
        let sol = Solution {
            trajectory: Trajectory::single(0.0, pt(0.0, 0.0)),
            final_time: 0.0,
            interceptions: vec![],
        };
        assert!(validate_solution(&inst, &sol, 1e-6).pass());
    }

    #[test]
    fn validate_rejects_overspeed_leg() {
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![stationary_target(1, pt(1.01, 0.0), 0.0, 1.0)],
        )
        .unwrap();
        let sol = Solution {
            trajectory: Trajectory::new(vec![
                Waypoint {
                    t: 0.0,
                    p: pt(0.0, 0.0),
                },
                Waypoint {
                    t: 1.0,
                    p: pt(1.01, 0.0),
                },
                Waypoint {
                    t: 2.01,
                    p: pt(0.0, 0.0),
                },
            ]),
            final_time: 2.01,
            interceptions: vec![Interception {
                target: 1,
                window_index: 0,
                time: 1.0,
            }],
        };
        let report = validate_solution(&inst, &sol, 1e-6);
        assert!(!report.pass());
        assert!(report.failures().any(|c| c.name == "speed_limit"));
    }

    #[test]
    fn validate_rejects_missed_target() {
        let inst = Instance::new(
            ObstacleSet::empty(),
            pt(0.0, 0.0),
            1.0,
            vec![stationary_target(1, pt(0.5, 0.0), 0.0, 1.0)],
        )
        .unwrap();
        let sol = Solution {
            trajectory: Trajectory::single(0.0, pt(0.0, 0.0)),
            final_time: 0.0,
            interceptions: vec![],
        };
        assert!(!validate_solution(&inst, &sol, 1e-6).pass());
    }

    #[test]
    fn instance_json_round_trip() {
        let text = r#"{
            "v_max": 2.0,
            "depot": [0.5, 0.5],
            "grid": {"rows": 4, "cols": 4, "cell_size": 1.0, "occupied": [[2, 2]]},
            "targets": [
                {"id": 1, "windows": [
                    {"t0": 0.0, "tf": 2.0, "p0": [3.5, 0.5], "vel": [0.0, 0.5]}
                ]}
            ]
        }"#;
        let inst: Instance<f64> = Instance::from_json(text).unwrap();
        assert_eq!(inst.obstacles.polygons.len(), 1);
        assert_eq!(inst.targets.len(), 1);
        let json = inst.to_json().unwrap();
        let again: Instance<f64> = Instance::from_json(&json).unwrap();
        assert_eq!(again.to_json().unwrap(), json);
    }

    #[test]
    fn solution_json_round_trip() {
        let sol = Solution {
            trajectory: Trajectory::new(vec![
                Waypoint {
                    t: 0.0,
                    p: pt(0.0, 0.0),
                },
                Waypoint {
                    t: 1.5,
                    p: pt(1.0, 1.0),
                },
            ]),
            final_time: 1.5,
            interceptions: vec![Interception {
                target: 1,
                window_index: 0,
                time: 1.5,
            }],
        };
        let json = sol.to_json().unwrap();
        let again: Solution<f64> = Solution::from_json(&json).unwrap();
        assert_eq!(again.to_json().unwrap(), json);
        assert_eq!(again.trajectory.waypoints().len(), 2);
    }

    #[test]
    fn position_at_interpolates_and_clamps() {
        let traj = Trajectory::new(vec![
            Waypoint {
                t: 1.0,
                p: pt(0.0, 0.0),
            },
            Waypoint {
                t: 3.0,
                p: pt(2.0, 0.0),
            },
        ]);
        assert_eq!(traj.position_at(0.0), pt(0.0, 0.0));
        assert_eq!(traj.position_at(2.0), pt(1.0, 0.0));
        assert_eq!(traj.position_at(9.0), pt(2.0, 0.0));
    }
}
