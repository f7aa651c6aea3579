//! Inputs shared by the benchmarks.

use curve_surgery::fixtures::{grid_flow, random_walk};
use curve_surgery::{Curve, EdgeFlow, Space};

/// Closed planar random walks of the given vertex counts.
pub fn walks(sizes: &[usize]) -> Vec<(usize, Curve)> {
    sizes
        .iter()
        .map(|&k| (k, random_walk(&Space::plane(), k, 0.1, k as u64)))
        .collect()
}

/// A flow of `cycles` overlapping rectangles on an `n × n` grid.
pub fn flow(n: usize, cycles: usize) -> EdgeFlow {
    grid_flow(n, cycles, 7)
}
