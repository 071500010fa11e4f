//! Feasible-by-construction instance generation: an agent witness tour is
//! laid down first, then each target's trajectory and windows are sampled
//! around its interception point.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{point_in_interior, segment_is_free, Point};
use crate::model::{
    GridSpec, Instance, Interception, ModelError, Solution, Target, TargetWindow, Trajectory,
};
use crate::scalar::{real, Real};
use crate::visgraph::{shortest_spatial_path, VisibilityGraph};

const RETRIES: usize = 1000;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("sampling failed at {stage} after {RETRIES} retries (seed {seed})")]
    Sampling { stage: &'static str, seed: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters for [`generate_instance`].
#[derive(Clone, Debug)]
pub struct GeneratorParams {
    pub n_targets: usize,
    pub windows_per_target: usize,
    /// Requested total window length per target, seconds.
    pub sum_window_len: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub cell_size: f64,
    pub occupancy_fraction: f64,
    pub v_max: f64,
    /// Witness tour speed as a fraction of `v_max`.
    pub beta: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_targets: 5,
            windows_per_target: 2,
            sum_window_len: 10.0,
            grid_rows: 10,
            grid_cols: 10,
            cell_size: 1.0,
            occupancy_fraction: 0.2,
            v_max: 1.0,
            beta: 0.99,
            seed: 0,
        }
    }
}

/// A generated instance together with the witness tour that proves it
/// feasible.
#[derive(Clone, Debug)]
pub struct Generated<F> {
    pub instance: Instance<F>,
    pub witness: Solution<F>,
}

struct TargetDraft<F> {
    windows: Vec<TargetWindow<F>>,
    intercept_window: usize,
}

pub fn generate_instance<F: Real>(params: &GeneratorParams) -> Result<Generated<F>, GenError> {
    validate_params(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let v_max = real::<F>(params.v_max);
    let beta_v = real::<F>(params.beta * params.v_max);

    // Occupancy grid.
    let total_cells = params.grid_rows * params.grid_cols;
    let n_occ = (params.occupancy_fraction * total_cells as f64).round() as usize;
    let mut occupied: Vec<[usize; 2]> = rand::seq::index::sample(&mut rng, total_cells, n_occ)
        .into_iter()
        .map(|i| [i / params.grid_cols, i % params.grid_cols])
        .collect();
    occupied.sort_unstable();
    let grid = GridSpec {
        rows: params.grid_rows,
        cols: params.grid_cols,
        cell_size: real::<F>(params.cell_size),
        occupied,
    };
    let obstacles = grid.to_obstacles().map_err(ModelError::Grid)?;

    let width = params.grid_cols as f64 * params.cell_size;
    let height = params.grid_rows as f64 * params.cell_size;
    let mut sample_free_point = |rng: &mut ChaCha8Rng| -> Option<Point<F>> {
        for _ in 0..RETRIES {
            let p = Point::new(
                real::<F>(rng.gen_range(0.0..width)),
                real::<F>(rng.gen_range(0.0..height)),
            );
            if !point_in_interior(p, &obstacles) {
                return Some(p);
            }
        }
        None
    };

    let depot = sample_free_point(&mut rng).ok_or(GenError::Sampling {
        stage: "depot",
        seed: params.seed,
    })?;

    // Obstacle-and-depot graph for witness path planning.
    let shell = Instance::new(obstacles.clone(), depot, v_max, vec![])?;
    let graph = VisibilityGraph::build(&shell);

    let mut witness = Trajectory::single(F::zero(), depot);
    let mut interceptions = Vec::new();
    let mut targets = Vec::new();
    let mut prev_point = depot;
    let mut prev_time = F::zero();

    for i in 1..=params.n_targets {
        // Interception position reachable from the previous one.
        let mut found = None;
        for _ in 0..RETRIES {
            let Some(p) = sample_free_point(&mut rng) else { break };
            if let Some((path, len)) = shortest_spatial_path(prev_point, p, &graph, &shell) {
                found = Some((p, path, len));
                break;
            }
        }
        let (p_i, path, _) = found.ok_or(GenError::Sampling {
            stage: "interception point",
            seed: params.seed,
        })?;
        extend_at_speed(&mut witness, &path, beta_v);
        let t_i = witness.final_time();

        let draft = sample_target_trajectory(
            &mut rng,
            params,
            p_i,
            t_i,
            &obstacles,
            params.seed,
        )?;
        interceptions.push(Interception {
            target: i as u32,
            window_index: draft.intercept_window,
            time: t_i,
        });
        targets.push(Target {
            id: i as u32,
            windows: draft.windows,
        });
        prev_point = p_i;
        prev_time = t_i;
    }
    let _ = prev_time;

    // Close the tour.
    if params.n_targets > 0 {
        let (path, _) = shortest_spatial_path(prev_point, depot, &graph, &shell).ok_or(
            GenError::Sampling {
                stage: "return leg",
                seed: params.seed,
            },
        )?;
        extend_at_speed(&mut witness, &path, beta_v);
    }

    let mut instance = Instance::new(obstacles, depot, v_max, targets)?;
    instance.grid = Some(grid);
    let final_time = witness.final_time();
    Ok(Generated {
        instance,
        witness: Solution {
            trajectory: witness,
            final_time,
            interceptions,
        },
    })
}

fn validate_params(params: &GeneratorParams) -> Result<(), GenError> {
    if !(params.occupancy_fraction >= 0.0 && params.occupancy_fraction < 1.0) {
        return Err(GenError::BadParams("occupancy_fraction must be in [0, 1)".into()));
    }
    if params.v_max <= 0.0 || params.sum_window_len <= 0.0 || params.cell_size <= 0.0 {
        return Err(GenError::BadParams("v_max, sum_window_len, cell_size must be positive".into()));
    }
    if params.windows_per_target == 0 || params.grid_rows == 0 || params.grid_cols == 0 {
        return Err(GenError::BadParams("windows_per_target and grid dims must be positive".into()));
    }
    if !(params.beta > 0.0 && params.beta <= 1.0) {
        return Err(GenError::BadParams("beta must be in (0, 1]".into()));
    }
    Ok(())
}

/// Appends polyline legs traversed at constant speed.
fn extend_at_speed<F: Real>(traj: &mut Trajectory<F>, path: &[Point<F>], speed: F) {
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dt = a.dist(b) / speed;
        if dt == F::zero() {
            continue;
        }
        let t = traj.final_time() + dt;
        traj.push(t, b);
    }
}

/// Samples a piecewise-linear target trajectory through `(p_i, t_i)`: one
/// linear segment per requested window, segment durations 1.5x the window
/// lengths, velocities with uniform direction and speed in
/// `[v_max/8, v_max/4]`; each window is a uniformly placed sub-interval of
/// its segment, the interception window containing `t_i`.
fn sample_target_trajectory<F: Real>(
    rng: &mut ChaCha8Rng,
    params: &GeneratorParams,
    p_i: Point<F>,
    t_i: F,
    obstacles: &crate::geometry::ObstacleSet<F>,
    seed: u64,
) -> Result<TargetDraft<F>, GenError> {
    let k = params.windows_per_target;
    't: for _ in 0..RETRIES {
        // Window lengths: bounded-ratio random split of the requested sum.
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
        let wsum: f64 = weights.iter().sum();
        let lengths: Vec<f64> = weights
            .iter()
            .map(|w| params.sum_window_len * w / wsum)
            .collect();
        let durations: Vec<f64> = lengths.iter().map(|l| 1.5 * l).collect();

        // Segment holding the interception, constrained so the whole
        // trajectory stays in nonnegative time.
        let t_i64 = t_i.to_f64().unwrap();
        let prefix: Vec<f64> = durations
            .iter()
            .scan(0.0, |acc, d| {
                let out = *acc;
                *acc += d;
                Some(out)
            })
            .collect();
        let eligible: Vec<usize> = (0..k).filter(|&m| prefix[m] <= t_i64).collect();
        if eligible.is_empty() {
            continue;
        }
        let m = eligible[rng.gen_range(0..eligible.len())];
        let delta_max = durations[m].min(t_i64 - prefix[m]);
        let delta = rng.gen_range(0.0..=delta_max);
        let start_time = t_i64 - prefix[m] - delta;

        // Per-segment velocities.
        let velocities: Vec<Point<F>> = (0..k)
            .map(|_| {
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                let speed = rng.gen_range(params.v_max / 8.0..params.v_max / 4.0);
                Point::new(
                    real::<F>(speed * angle.cos()),
                    real::<F>(speed * angle.sin()),
                )
            })
            .collect();

        // Segment boundary positions, anchored at the interception.
        let seg_lo: Vec<f64> = (0..k).map(|j| start_time + prefix[j]).collect();
        let mut boundary = vec![Point::new(F::zero(), F::zero()); k + 1];
        boundary[m] = p_i.sub(velocities[m].scale(real::<F>(delta)));
        for j in (0..m).rev() {
            boundary[j] = boundary[j + 1].sub(velocities[j].scale(real::<F>(durations[j])));
        }
        for j in m..k {
            boundary[j + 1] = boundary[j].add(velocities[j].scale(real::<F>(durations[j])));
        }

        // Windows inside their segments; the m-th must contain t_i.
        let mut windows = Vec::with_capacity(k);
        for j in 0..k {
            let (lo_min, lo_max) = if j == m {
                (
                    (t_i64 - lengths[j]).max(seg_lo[j]),
                    t_i64.min(seg_lo[j] + durations[j] - lengths[j]),
                )
            } else {
                (seg_lo[j], seg_lo[j] + durations[j] - lengths[j])
            };
            if lo_max < lo_min {
                continue 't;
            }
            let lo = if lo_max > lo_min {
                rng.gen_range(lo_min..=lo_max)
            } else {
                lo_min
            };
            let t0 = real::<F>(lo);
            let tf = real::<F>(lo + lengths[j]);
            let p0 = boundary[j].add(velocities[j].scale(t0 - real::<F>(seg_lo[j])));
            let sweep_end = p0.add(velocities[j].scale(tf - t0));
            if !segment_is_free(p0, sweep_end, obstacles) {
                continue 't;
            }
            windows.push(TargetWindow {
                t0,
                tf,
                p0,
                vel: velocities[j],
            });
        }
        return Ok(TargetDraft {
            windows,
            intercept_window: m,
        });
    }
    Err(GenError::Sampling {
        stage: "target trajectory",
        seed,
    })
}

/// Shrinks every window (preserving each target's witness interception time)
/// so per-target sums equal `new_sum_len`. Window motions are restrictions of
/// the original ones, so feasibility is preserved.
pub fn shorten_windows<F: Real>(
    gen: &Generated<F>,
    new_sum_len: f64,
    seed: u64,
) -> Result<Generated<F>, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instance = gen.instance.clone();
    for target in &mut instance.targets {
        let old_sum: f64 = target
            .windows
            .iter()
            .map(|w| w.length().to_f64().unwrap())
            .sum();
        if new_sum_len > old_sum + 1e-9 {
            return Err(GenError::BadParams(format!(
                "new sum {new_sum_len} exceeds current sum {old_sum} for target {}",
                target.id
            )));
        }
        if new_sum_len <= 0.0 {
            return Err(GenError::BadParams("new sum must be positive".into()));
        }
        let itc = gen
            .witness
            .interceptions
            .iter()
            .find(|i| i.target == target.id)
            .expect("witness intercepts every target");
        let ratio = new_sum_len / old_sum;
        for (j, w) in target.windows.iter_mut().enumerate() {
            let len = w.length().to_f64().unwrap() * ratio;
            let t0 = w.t0.to_f64().unwrap();
            let tf = w.tf.to_f64().unwrap();
            let (lo_min, lo_max) = if j == itc.window_index {
                let ti = itc.time.to_f64().unwrap();
                ((ti - len).max(t0), ti.min(tf - len))
            } else {
                (t0, tf - len)
            };
            let lo = if lo_max > lo_min {
                rng.gen_range(lo_min..=lo_max)
            } else {
                lo_min
            };
            let new_t0 = real::<F>(lo);
            w.p0 = w.position(new_t0);
            w.t0 = new_t0;
            w.tf = real::<F>(lo + len);
        }
    }
    Ok(Generated {
        instance,
        witness: gen.witness.clone(),
    })
}

/// Splits each target's single window into `k` contiguous windows covering
/// the same span, re-sampling a velocity per piece while keeping the target's
/// position at the witness interception time fixed.
pub fn split_windows<F: Real>(
    gen: &Generated<F>,
    k: usize,
    seed: u64,
) -> Result<Generated<F>, GenError> {
    if k == 0 {
        return Err(GenError::BadParams("window count must be positive".into()));
    }
    if k == 1 {
        return Ok(gen.clone());
    }
    if gen.instance.targets.iter().any(|t| t.windows.len() != 1) {
        return Err(GenError::BadParams(
            "split requires one window per target".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instance = gen.instance.clone();
    let mut witness = gen.witness.clone();
    let v_max = instance.v_max.to_f64().unwrap();

    for target in &mut instance.targets {
        let w = target.windows[0];
        let (t0, tf) = (w.t0.to_f64().unwrap(), w.tf.to_f64().unwrap());
        let span = tf - t0;
        let itc = witness
            .interceptions
            .iter_mut()
            .find(|i| i.target == target.id)
            .expect("witness intercepts every target");
        let ti = itc.time.to_f64().unwrap();
        let anchor_pos = w.position(itc.time);

        let mut pieces = None;
        'retry: for _ in 0..RETRIES {
            // Interior cut points, separated and clear of the interception.
            let min_gap = span * 1e-3;
            let mut cuts: Vec<f64> = (0..k - 1)
                .map(|_| rng.gen_range(t0..tf))
                .collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut all = vec![t0];
            all.extend(cuts.iter().copied());
            all.push(tf);
            if all.windows(2).any(|p| p[1] - p[0] < min_gap)
                || cuts.iter().any(|c| (c - ti).abs() < min_gap)
            {
                continue;
            }
            let m = all.windows(2).position(|p| p[0] <= ti && ti <= p[1]).unwrap();

            let velocities: Vec<Point<F>> = (0..k)
                .map(|_| {
                    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                    let speed = rng.gen_range(v_max / 8.0..v_max / 4.0);
                    Point::new(
                        real::<F>(speed * angle.cos()),
                        real::<F>(speed * angle.sin()),
                    )
                })
                .collect();
            // Anchor the piecewise trajectory at the interception.
            let mut boundary = vec![Point::new(F::zero(), F::zero()); k + 1];
            boundary[m] = anchor_pos.sub(velocities[m].scale(real::<F>(ti - all[m])));
            for j in (0..m).rev() {
                boundary[j] =
                    boundary[j + 1].sub(velocities[j].scale(real::<F>(all[j + 1] - all[j])));
            }
            for j in m..k {
                boundary[j + 1] =
                    boundary[j].add(velocities[j].scale(real::<F>(all[j + 1] - all[j])));
            }
            let mut windows = Vec::with_capacity(k);
            for j in 0..k {
                let p0 = boundary[j];
                let sweep_end = boundary[j + 1];
                if !segment_is_free(p0, sweep_end, &instance.obstacles) {
                    continue 'retry;
                }
                windows.push(TargetWindow {
                    t0: real::<F>(all[j]),
                    tf: real::<F>(all[j + 1]),
                    p0,
                    vel: velocities[j],
                });
            }
            pieces = Some((windows, m));
            break;
        }
        let (windows, m) = pieces.ok_or(GenError::Sampling {
            stage: "window split",
            seed,
        })?;
        target.windows = windows;
        itc.window_index = m;
    }
    Ok(Generated { instance, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_solution;
    use crate::tour_search::{dfs_solve, DfsOptions};
    use crate::visgraph::Scene;
    use crate::window_graph::build_time_window_graph;

    fn desk_params(seed: u64) -> GeneratorParams {
        GeneratorParams {
            n_targets: 3,
            windows_per_target: 2,
            sum_window_len: 8.0,
            grid_rows: 8,
            grid_cols: 8,
            cell_size: 1.0,
            occupancy_fraction: 0.2,
            v_max: 1.0,
            beta: 0.99,
            seed,
        }
    }

    #[test]
    fn zero_targets_depot_only() {
        let mut p = desk_params(1);
        p.n_targets = 0;
        let gen = generate_instance::<f64>(&p).unwrap();
        assert!(gen.instance.targets.is_empty());
        assert_eq!(gen.witness.final_time, 0.0);
    }

    #[test]
    fn witness_validates_and_sums_match() {
        for seed in 0..5 {
            let p = desk_params(seed);
            let gen = generate_instance::<f64>(&p).unwrap();
            let report = validate_solution(&gen.instance, &gen.witness, 1e-6);
            assert!(report.pass(), "seed {seed}: {:?}", report.failures().collect::<Vec<_>>());
            for t in &gen.instance.targets {
                let sum: f64 = t.windows.iter().map(|w| w.length()).sum();
                assert!((sum - p.sum_window_len).abs() < 1e-9);
                assert_eq!(t.windows.len(), p.windows_per_target);
            }
            // Witness moves at beta * v_max at most.
            for (a, b) in gen.witness.trajectory.legs() {
                let dt = b.t - a.t;
                if dt > 0.0 {
                    assert!(a.p.dist(b.p) / dt <= 0.99 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn generated_instances_are_solver_feasible() {
        for seed in [7, 8] {
            let gen = generate_instance::<f64>(&desk_params(seed)).unwrap();
            let scene = Scene::build(&gen.instance);
            let gtw = build_time_window_graph(&gen.instance, &scene);
            let (outcome, _) = dfs_solve(&gen.instance, &scene, &gtw, &DfsOptions::default());
            let sol = outcome.solution().expect("generated instances are feasible");
            assert!(validate_solution(&gen.instance, sol, 1e-6).pass());
        }
    }

    #[test]
    fn determinism_under_seed() {
        let a = generate_instance::<f64>(&desk_params(42)).unwrap();
        let b = generate_instance::<f64>(&desk_params(42)).unwrap();
        assert_eq!(a.instance.to_json().unwrap(), b.instance.to_json().unwrap());
        assert_eq!(a.witness.to_json().unwrap(), b.witness.to_json().unwrap());
        let c = generate_instance::<f64>(&desk_params(43)).unwrap();
        assert_ne!(a.instance.to_json().unwrap(), c.instance.to_json().unwrap());
    }

    #[test]
    fn shorten_preserves_feasibility_and_sum() {
        let gen = generate_instance::<f64>(&desk_params(3)).unwrap();
        let short = shorten_windows(&gen, 2.0, 99).unwrap();
        for t in &short.instance.targets {
            let sum: f64 = t.windows.iter().map(|w| w.length()).sum();
            assert!((sum - 2.0).abs() < 1e-9);
        }
        assert!(validate_solution(&short.instance, &short.witness, 1e-6).pass());
        let scene = Scene::build(&short.instance);
        let gtw = build_time_window_graph(&short.instance, &scene);
        let (outcome, _) = dfs_solve(&short.instance, &scene, &gtw, &DfsOptions::default());
        assert!(outcome.solution().is_some());
        // Growing the sum is rejected.
        assert!(shorten_windows(&gen, 100.0, 0).is_err());
    }

    #[test]
    fn split_preserves_feasibility_and_span() {
        let mut p = desk_params(11);
        p.windows_per_target = 1;
        p.sum_window_len = 12.0;
        let gen = generate_instance::<f64>(&p).unwrap();
        let split = split_windows(&gen, 4, 5).unwrap();
        for t in &split.instance.targets {
            assert_eq!(t.windows.len(), 4);
            let sum: f64 = t.windows.iter().map(|w| w.length()).sum();
            assert!((sum - 12.0).abs() < 1e-9);
        }
        assert!(validate_solution(&split.instance, &split.witness, 1e-6).pass());
        let scene = Scene::build(&split.instance);
        let gtw = build_time_window_graph(&split.instance, &scene);
        let (outcome, _) = dfs_solve(&split.instance, &scene, &gtw, &DfsOptions::default());
        assert!(outcome.solution().is_some());
        // k = 1 is the identity.
        let same = split_windows(&gen, 1, 5).unwrap();
        assert_eq!(
            same.instance.to_json().unwrap(),
            gen.instance.to_json().unwrap()
        );
    }
}
