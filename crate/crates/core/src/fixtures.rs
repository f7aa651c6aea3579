//! Deterministic test curves and flows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::Curve;
use crate::space::{Point, Space};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn build(space: Space, pts: Vec<Point>, closed: bool) -> Curve {
    Curve::from_vertices(space, &pts, closed).expect("fixture vertices are distinct")
}

pub fn unit_square() -> Curve {
    polygon(Space::plane(), &[(0., 0.), (1., 0.), (1., 1.), (0., 1.)])
}

/// A closed polygon in a two-dimensional space.
pub fn polygon(space: Space, pts: &[(f64, f64)]) -> Curve {
    build(space, pts.iter().map(|&(x, y)| Point::xy(x, y)).collect(), true)
}

/// Closed `w × h` rectangle with a corner at the origin.
pub fn rectangle(w: f64, h: f64) -> Curve {
    polygon(Space::plane(), &[(0., 0.), (w, 0.), (w, h), (0., h)])
}

/// `k` uniform random vertices in the unit cube, joined into a closed
/// polygon.
pub fn random_polygon(space: &Space, k: usize, seed: u64) -> Curve {
    let mut r = rng(seed);
    let d = space.dim();
    let pts = (0..k)
        .map(|_| Point((0..d).map(|_| r.gen::<f64>()).collect()))
        .collect();
    build(space.clone(), pts, true)
}

/// A closed random walk of `k` vertices in the unit cube with steps of
/// size at most `step` per coordinate.
pub fn random_walk(space: &Space, k: usize, step: f64, seed: u64) -> Curve {
    let mut r = rng(seed);
    let d = space.dim();
    let mut x: Vec<f64> = (0..d).map(|_| r.gen::<f64>()).collect();
    let mut pts = Vec::with_capacity(k);
    while pts.len() < k {
        let y: Vec<f64> = x
            .iter()
            .map(|v| (v + r.gen_range(-step..step)).clamp(0.0, 1.0))
            .collect();
        if y != x {
            pts.push(Point(y.clone()));
            x = y;
        }
    }
    if pts.first() == pts.last() {
        pts.pop();
    }
    build(space.clone(), pts, true)
}

/// A random open segment in the unit cube.
pub fn random_segment(space: &Space, seed: u64) -> Curve {
    let mut r = rng(seed);
    let d = space.dim();
    let a = Point((0..d).map(|_| r.gen::<f64>()).collect());
    let b = Point((0..d).map(|_| r.gen::<f64>()).collect());
    build(space.clone(), vec![a, b], false)
}

/// `count` short zigzag edges of length `edge` along the x-axis, closed by
/// a tall detour, so that the short edges sit in one window.
pub fn zigzag(count: usize, edge: f64) -> Curve {
    let dx = 0.8 * edge;
    let dy = 0.6 * edge;
    let mut pts = vec![(0.0, 0.0)];
    for k in 1..=count {
        let y = if k % 2 == 1 { dy } else { 0.0 };
        pts.push((dx * k as f64, y));
    }
    let x_end = dx * count as f64;
    pts.push((x_end, 30.0 * edge));
    polygon(Space::plane(), &pts)
}

/// A divergence-free flow: random unit-weight cycles on an `n × n` grid,
/// aggregated per directed edge.
pub fn grid_flow(n: usize, cycles: usize, seed: u64) -> crate::decompose::EdgeFlow {
    let mut r = rng(seed);
    let node = |i: usize, j: usize| i * n + j;
    let nodes: Vec<Point> = (0..n * n)
        .map(|k| Point::xy((k / n) as f64 / (n - 1) as f64, (k % n) as f64 / (n - 1) as f64))
        .collect();
    let mut flow = std::collections::BTreeMap::new();
    for _ in 0..cycles {
        // an axis-aligned rectangle cycle with random corners and weight
        let (i0, i1) = loop {
            let a = r.gen_range(0..n);
            let b = r.gen_range(0..n);
            if a != b {
                break (a.min(b), a.max(b));
            }
        };
        let (j0, j1) = loop {
            let a = r.gen_range(0..n);
            let b = r.gen_range(0..n);
            if a != b {
                break (a.min(b), a.max(b));
            }
        };
        let w: f64 = r.gen_range(0.25..2.0);
        let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut ring = Vec::new();
        for i in i0..i1 {
            ring.push((node(i, j0), node(i + 1, j0)));
        }
        for j in j0..j1 {
            ring.push((node(i1, j), node(i1, j + 1)));
        }
        for i in (i0 + 1..=i1).rev() {
            ring.push((node(i, j1), node(i - 1, j1)));
        }
        for j in (j0 + 1..=j1).rev() {
            ring.push((node(i0, j), node(i0, j - 1)));
        }
        for (a, b) in ring {
            let (key, s) = if a < b { ((a, b), sign) } else { ((b, a), -sign) };
            *flow.entry(key).or_insert(0.0) += s * w;
        }
    }
    let edges = flow
        .into_iter()
        .filter(|(_, f)| *f != 0.0)
        .map(|((a, b), f)| crate::decompose::FlowEdge { from: a, to: b, flow: f })
        .collect();
    crate::decompose::EdgeFlow {
        space: Space::plane(),
        nodes,
        edges,
    }
}
