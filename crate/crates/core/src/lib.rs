//! Solver for the moving-target traveling salesman problem with obstacles.

pub mod geometry;
pub mod analysis;
pub mod baseline;
pub mod generator;
pub mod model;
pub mod visgraph;
pub mod window_graph;
pub mod planner;
pub mod scalar;
pub mod tour_search;
