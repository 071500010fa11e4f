//! Occupancy-grid ingestion: occupied cells become rectilinear polygons.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::{ObstacleSet, Point};
use crate::scalar::{real, Real};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("cell ({row}, {col}) outside {rows}x{cols} grid")]
    OutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("malformed grid text: {0}")]
    Parse(String),
}

/// Merges occupied cells into boundary loops and extracts convex vertices.
///
/// Cells are merged 4-connected; cells touching only at a corner stay in
/// separate polygons, so the shared corner remains a usable boundary point.
/// The grid origin is the lower-left corner; cell `(r, c)` spans
/// `[c, c+1] x [r, r+1]` times `cell_size`.
pub fn load_occupancy_grid<F: Real>(
    rows: usize,
    cols: usize,
    cell_size: F,
    occupied: &[(usize, usize)],
) -> Result<ObstacleSet<F>, GridError> {
    let mut cells: HashSet<(usize, usize)> = HashSet::new();
    for &(r, c) in occupied {
        if r >= rows || c >= cols {
            return Err(GridError::OutOfRange {
                row: r,
                col: c,
                rows,
                cols,
            });
        }
        cells.insert((r, c));
    }

    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut loops: Vec<Vec<(i64, i64)>> = Vec::new();
    // Row-major scan keeps component order deterministic.
    let mut order: Vec<(usize, usize)> = cells.iter().copied().collect();
    order.sort_unstable();
    for &start in &order {
        if seen.contains(&start) {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some((r, c)) = queue.pop_front() {
            component.push((r, c));
            let mut push = |r2: i64, c2: i64| {
                if r2 >= 0 && c2 >= 0 {
                    let key = (r2 as usize, c2 as usize);
                    if cells.contains(&key) && seen.insert(key) {
                        queue.push_back(key);
                    }
                }
            };
            push(r as i64 - 1, c as i64);
            push(r as i64 + 1, c as i64);
            push(r as i64, c as i64 - 1);
            push(r as i64, c as i64 + 1);
        }
        loops.extend(trace_component(&component, &cells));
    }

    let polygons = loops
        .into_iter()
        .map(|lp| {
            lp.into_iter()
                .map(|(x, y)| {
                    Point::new(real::<F>(x as f64) * cell_size, real::<F>(y as f64) * cell_size)
                })
                .collect()
        })
        .collect();
    Ok(ObstacleSet::from_loops(polygons))
}

/// Boundary loops of one 4-connected component, on the integer lattice.
/// Material sits on the left of every directed edge, so outer loops come out
/// CCW and hole loops CW.
fn trace_component(
    component: &[(usize, usize)],
    cells: &HashSet<(usize, usize)>,
) -> Vec<Vec<(i64, i64)>> {
    type V = (i64, i64);
    let mut edges: HashMap<V, Vec<V>> = HashMap::new();
    let mut add = |from: V, to: V| edges.entry(from).or_default().push(to);
    for &(r, c) in component {
        let (x, y) = (c as i64, r as i64);
        let occ = |r2: i64, c2: i64| {
            r2 >= 0 && c2 >= 0 && cells.contains(&(r2 as usize, c2 as usize))
        };
        if !occ(y - 1, x) {
            add((x, y), (x + 1, y)); // bottom
        }
        if !occ(y, x + 1) {
            add((x + 1, y), (x + 1, y + 1)); // right
        }
        if !occ(y + 1, x) {
            add((x + 1, y + 1), (x, y + 1)); // top
        }
        if !occ(y, x - 1) {
            add((x, y + 1), (x, y)); // left
        }
    }
    for outs in edges.values_mut() {
        outs.sort_unstable();
    }

    let mut starts: Vec<V> = edges.keys().copied().collect();
    starts.sort_unstable();
    let mut loops = Vec::new();
    for &start in &starts {
        while edges.get(&start).is_some_and(|v| !v.is_empty()) {
            loops.push(trace_loop(start, &mut edges));
        }
    }
    loops
}

fn trace_loop(
    start: (i64, i64),
    edges: &mut HashMap<(i64, i64), Vec<(i64, i64)>>,
) -> Vec<(i64, i64)> {
    let mut path = vec![start];
    let mut current = edges.get_mut(&start).unwrap().remove(0);
    let mut dir = (current.0 - start.0, current.1 - start.1);
    while current != start {
        path.push(current);
        let outs = edges.get_mut(&current).expect("boundary edges form loops");
        // A component's boundary can touch itself at a lattice corner (e.g. a
        // hole pinching against the outer boundary). Preferring the sharpest
        // right turn splits such contacts into separate simple loops.
        let preference = [(dir.1, -dir.0), dir, (-dir.1, dir.0)];
        let next_dir = preference
            .into_iter()
            .find(|d| outs.contains(&(current.0 + d.0, current.1 + d.1)))
            .expect("boundary edge continuation");
        let next = (current.0 + next_dir.0, current.1 + next_dir.1);
        outs.retain(|&v| v != next);
        dir = next_dir;
        current = next;
    }
    // Drop collinear lattice points.
    let n = path.len();
    let mut simplified = Vec::with_capacity(n);
    for i in 0..n {
        let prev = path[(i + n - 1) % n];
        let v = path[i];
        let next = path[(i + 1) % n];
        let d1 = (v.0 - prev.0, v.1 - prev.1);
        let d2 = (next.0 - v.0, next.1 - v.1);
        if d1 != d2 {
            simplified.push(v);
        }
    }
    simplified
}

/// Parses the occupancy-grid text format: a header line `rows cols cell_size`
/// followed by `rows` lines of `#` (occupied) / `.` (free). The first body
/// line is the top row (`row = rows - 1`); row 0 is the bottom.
pub fn parse_grid_text<F: Real>(text: &str) -> Result<ObstacleSet<F>, GridError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| GridError::Parse("empty input".into()))?;
    let mut it = header.split_whitespace();
    let rows: usize = parse_field(it.next(), "rows")?;
    let cols: usize = parse_field(it.next(), "cols")?;
    let cell_size: f64 = parse_field(it.next(), "cell_size")?;
    let mut occupied = Vec::new();
    for i in 0..rows {
        let row = rows - 1 - i;
        let line = lines
            .next()
            .ok_or_else(|| GridError::Parse(format!("missing grid row {row}")))?;
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != cols {
            return Err(GridError::Parse(format!(
                "row {row} has {} cells, expected {cols}",
                chars.len()
            )));
        }
        for (c, &ch) in chars.iter().enumerate() {
            match ch {
                '#' => occupied.push((row, c)),
                '.' => {}
                other => {
                    return Err(GridError::Parse(format!("unexpected cell char {other:?}")))
                }
            }
        }
    }
    load_occupancy_grid(rows, cols, real::<F>(cell_size), &occupied)
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, name: &str) -> Result<T, GridError> {
    tok.ok_or_else(|| GridError::Parse(format!("missing {name}")))?
        .parse()
        .map_err(|_| GridError::Parse(format!("bad {name}")))
}
