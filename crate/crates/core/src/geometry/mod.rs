//! 2D geometry: points, rectilinear obstacle sets from occupancy grids, and
//! the free-space predicates the planners are built on.
//!
//! Obstacle boundaries are traversable: every predicate here treats grazing
//! contact (a point or segment touching an edge or vertex) as free, and only
//! strict interior containment as a collision.

mod grid;
mod interval;
mod visibility;

pub use grid::{load_occupancy_grid, parse_grid_text, GridError};
pub use interval::{Interval, IntervalSet, MERGE_TOL};
pub use visibility::{visible_sub_intervals, WindowMotion};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Global geometric tolerance in meters.
pub const GEO_EPS: f64 = 1e-9;

/// A point (or free vector) in the plane, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<F> {
    pub x: F,
    pub y: F,
}

impl<F: Real> Point<F> {
    pub fn new(x: F, y: F) -> Self {
        Point { x, y }
    }

    pub fn add(self, o: Point<F>) -> Point<F> {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Point<F>) -> Point<F> {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: F) -> Point<F> {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Point<F>) -> F {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point<F>) -> F {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> F {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point<F>) -> F {
        self.sub(o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn coord(self) -> robust::Coord<f64> {
        robust::Coord {
            x: self.x.to_f64().expect("coordinate convertible to f64"),
            y: self.y.to_f64().expect("coordinate convertible to f64"),
        }
    }
}

/// Sign of the area of triangle `abc`: positive iff `c` lies strictly to the
/// left of the directed line `a -> b`. Exact for f32/f64 inputs.
pub fn orient<F: Real>(a: Point<F>, b: Point<F>, c: Point<F>) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

/// True iff `p` lies on the closed segment `[a, b]`.
pub fn on_segment<F: Real>(p: Point<F>, a: Point<F>, b: Point<F>) -> bool {
    if orient(a, b, p) != 0.0 {
        return false;
    }
    let (lo_x, hi_x) = minmax(a.x, b.x);
    let (lo_y, hi_y) = minmax(a.y, b.y);
    p.x >= lo_x && p.x <= hi_x && p.y >= lo_y && p.y <= hi_y
}

fn minmax<F: Real>(a: F, b: F) -> (F, F) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance<F: Real>(p: Point<F>, a: Point<F>, b: Point<F>) -> F {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == F::zero() {
        return p.dist(a);
    }
    let t = p.sub(a).dot(ab) / len2;
    let t = t.max(F::zero()).min(F::one());
    p.dist(a.add(ab.scale(t)))
}

/// A set of polygonal obstacles.
///
/// Each entry of `polygons` is one simple boundary loop. Outer boundaries are
/// counterclockwise; hole loops (free pockets enclosed by an obstacle) are
/// clockwise, so interior membership is the even-odd rule over all loops and
/// signed areas sum to the total material area.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ObstacleSet<F> {
    pub polygons: Vec<Vec<Point<F>>>,
    /// Vertices whose material angle is < pi, deduplicated. Shortest paths
    /// only ever bend at these.
    pub convex_vertices: Vec<Point<F>>,
}

impl<F: Real> ObstacleSet<F> {
    pub fn empty() -> Self {
        ObstacleSet {
            polygons: Vec::new(),
            convex_vertices: Vec::new(),
        }
    }

    /// Builds from explicit loops (outer CCW, holes CW) and extracts convex
    /// vertices. Loops must be simple and free of repeated vertices.
    pub fn from_loops(polygons: Vec<Vec<Point<F>>>) -> Self {
        let convex_vertices = convex_vertices_of(&polygons);
        ObstacleSet {
            polygons,
            convex_vertices,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    /// Sum of signed loop areas: material area (holes subtract).
    pub fn total_area(&self) -> F {
        let mut total = F::zero();
        for poly in &self.polygons {
            total += signed_area(poly);
        }
        total
    }

    fn edges(&self) -> impl Iterator<Item = (Point<F>, Point<F>)> + '_ {
        self.polygons.iter().flat_map(|poly| {
            (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
        })
    }
}

/// Signed area of a closed loop (shoelace), positive for CCW.
pub fn signed_area<F: Real>(poly: &[Point<F>]) -> F {
    let mut twice = F::zero();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        twice += a.cross(b);
    }
    twice / crate::scalar::real(2.0)
}

fn convex_vertices_of<F: Real>(polygons: &[Vec<Point<F>>]) -> Vec<Point<F>> {
    let mut out: Vec<Point<F>> = Vec::new();
    for poly in polygons {
        let n = poly.len();
        for i in 0..n {
            let prev = poly[(i + n - 1) % n];
            let v = poly[i];
            let next = poly[(i + 1) % n];
            // Left turn <=> material angle < pi, for outer-CCW / hole-CW loops.
            if orient(prev, v, next) > 0.0 && !out.iter().any(|&q| q == v) {
                out.push(v);
            }
        }
    }
    out
}

/// True iff `p` is strictly inside some obstacle. Boundary points are free.
pub fn point_in_interior<F: Real>(p: Point<F>, obs: &ObstacleSet<F>) -> bool {
    if obs.is_empty() {
        return false;
    }
    for (a, b) in obs.edges() {
        if on_segment(p, a, b) {
            return false;
        }
    }
    // Even-odd rule over all loops with exact crossing tests. `p` is off the
    // boundary here, so each edge either clearly straddles the horizontal
    // through `p` or does not.
    let mut inside = false;
    for (a, b) in obs.edges() {
        let up = a.y <= p.y && p.y < b.y;
        let down = b.y <= p.y && p.y < a.y;
        if !(up || down) {
            continue;
        }
        let side = orient(a, b, p);
        if (up && side > 0.0) || (down && side < 0.0) {
            inside = !inside;
        }
    }
    inside
}

/// True iff the open segment `(a, b)` avoids every obstacle interior.
/// Running along edges or touching vertices is free.
pub fn segment_is_free<F: Real>(a: Point<F>, b: Point<F>, obs: &ObstacleSet<F>) -> bool {
    if obs.is_empty() {
        return true;
    }
    if a == b {
        return !point_in_interior(a, obs);
    }
    // Split the segment at every contact with an obstacle edge, then test one
    // interior point of each piece. Contacts never hide inside a piece.
    let mut params: Vec<f64> = vec![0.0, 1.0];
    let ab = b.sub(a);
    for (c, d) in obs.edges() {
        let d1 = orient(a, b, c);
        let d2 = orient(a, b, d);
        let d3 = orient(c, d, a);
        let d4 = orient(c, d, b);
        if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
            // Proper crossing.
            let cd = d.sub(c);
            let denom = ab.cross(cd).to_f64().unwrap();
            let t = c.sub(a).cross(cd).to_f64().unwrap() / denom;
            params.push(t.clamp(0.0, 1.0));
            continue;
        }
        if d1 == 0.0 {
            if let Some(t) = segment_param(a, b, c) {
                params.push(t);
            }
        }
        if d2 == 0.0 {
            if let Some(t) = segment_param(a, b, d) {
                params.push(t);
            }
        }
    }
    params.sort_by(|x, y| x.partial_cmp(y).unwrap());
    params.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    for w in params.windows(2) {
        let mid = (w[0] + w[1]) / 2.0;
        let m = a.add(ab.scale(crate::scalar::real(mid)));
        if point_in_interior(m, obs) {
            return false;
        }
    }
    true
}

/// Parameter of collinear point `p` along `a -> b`, if within the span.
fn segment_param<F: Real>(a: Point<F>, b: Point<F>, p: Point<F>) -> Option<f64> {
    let ab = b.sub(a);
    let len2 = ab.dot(ab).to_f64().unwrap();
    let t = p.sub(a).dot(ab).to_f64().unwrap() / len2;
    if (0.0..=1.0).contains(&t) {
        Some(t)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn unit_square(x0: f64, y0: f64, x1: f64, y1: f64) -> ObstacleSet<f64> {
        ObstacleSet::from_loops(vec![vec![
            pt(x0, y0),
            pt(x1, y0),
            pt(x1, y1),
            pt(x0, y1),
        ]])
    }

    #[test]
    fn interior_of_unit_square() {
        let obs = unit_square(0.0, 0.0, 1.0, 1.0);
        assert!(point_in_interior(pt(0.5, 0.5), &obs));
        // Boundary is free.
        assert!(!point_in_interior(pt(0.0, 0.0), &obs));
        assert!(!point_in_interior(pt(0.5, 0.0), &obs));
        assert!(!point_in_interior(pt(1.5, 0.5), &obs));
    }

    #[test]
    fn near_edge_point_is_interior() {
        let obs = unit_square(0.0, 0.0, 1.0, 1.0);
        assert!(point_in_interior(pt(0.5, 1e-12), &obs));
        assert!(!point_in_interior(pt(0.5, -1e-12), &obs));
    }

    #[test]
    fn segment_free_no_obstacles() {
        let obs = ObstacleSet::empty();
        assert!(segment_is_free(pt(0.0, 0.0), pt(3.0, 0.0), &obs));
    }

    #[test]
    fn segment_through_square_blocked() {
        let obs = unit_square(1.0, -0.5, 2.0, 0.5);
        assert!(!segment_is_free(pt(0.0, 0.0), pt(3.0, 0.0), &obs));
        assert!(!segment_is_free(pt(3.0, 0.0), pt(0.0, 0.0), &obs));
    }

    #[test]
    fn segment_along_edge_is_free() {
        let obs = unit_square(1.0, 0.0, 2.0, 1.0);
        // Collinear with the bottom edge, overlapping it.
        assert!(segment_is_free(pt(0.0, 0.0), pt(3.0, 0.0), &obs));
        // Also exactly the edge itself.
        assert!(segment_is_free(pt(1.0, 0.0), pt(2.0, 0.0), &obs));
    }

    #[test]
    fn segment_touching_vertex_is_free() {
        let obs = unit_square(1.0, 0.0, 2.0, 1.0);
        assert!(segment_is_free(pt(0.0, 1.0), pt(2.0, -1.0), &obs));
    }

    #[test]
    fn segment_through_vertex_into_interior_blocked() {
        let obs = unit_square(1.0, 1.0, 2.0, 2.0);
        assert!(!segment_is_free(pt(0.0, 0.0), pt(2.0, 2.0), &obs));
    }

    #[test]
    fn segment_between_corner_touching_squares_is_free() {
        // Two squares sharing the corner (1, 1); the diagonal through the
        // shared corner stays in free space.
        let mut obs = unit_square(0.0, 0.0, 1.0, 1.0);
        let other = unit_square(1.0, 1.0, 2.0, 2.0);
        obs.polygons.extend(other.polygons);
        assert!(segment_is_free(pt(2.0, 0.0), pt(0.0, 2.0), &obs));
        assert!(!segment_is_free(pt(0.0, 0.5), pt(2.0, 0.5), &obs));
    }

    #[test]
    fn endpoint_inside_blocked() {
        let obs = unit_square(0.0, 0.0, 1.0, 1.0);
        assert!(!segment_is_free(pt(0.5, 0.5), pt(3.0, 0.0), &obs));
        assert!(!segment_is_free(pt(0.5, 0.5), pt(0.5, 0.5), &obs));
    }

    #[test]
    fn convex_vertices_of_square() {
        let obs = unit_square(0.0, 0.0, 1.0, 1.0);
        assert_eq!(obs.convex_vertices.len(), 4);
    }

    #[test]
    fn l_shape_reflex_vertex_not_convex() {
        // L-shaped hexagon, CCW; the inner corner at (1, 1) is reflex.
        let obs = ObstacleSet::from_loops(vec![vec![
            pt(0.0, 0.0),
            pt(2.0, 0.0),
            pt(2.0, 1.0),
            pt(1.0, 1.0),
            pt(1.0, 2.0),
            pt(0.0, 2.0),
        ]]);
        assert_eq!(obs.convex_vertices.len(), 5);
        assert!(!obs.convex_vertices.iter().any(|&v| v == pt(1.0, 1.0)));
    }

    #[test]
    fn point_segment_distance_basic() {
        assert_eq!(
            point_segment_distance(pt(0.0, 0.0), pt(3.0, 4.0), pt(3.0, 10.0)),
            5.0
        );
        assert_eq!(
            point_segment_distance(pt(1.0, 0.0), pt(0.0, 0.0), pt(2.0, 0.0)),
            0.0
        );
    }
}
