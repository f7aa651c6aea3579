//! Library results against brute-force reference computations.

mod common;

use common::{dist, planar, segment_in_disc, segments, V2};
use curve_surgery::fixtures::{random_polygon, random_walk, unit_square};
use curve_surgery::{ball_mass, is_lsi, Curve, Point, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ball_mass_matches_disc_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..20 {
        let c = random_polygon(&Space::plane(), 8, seed);
        let segs = segments(&planar(&c), true);
        for _ in 0..50 {
            let x: V2 = [rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2)];
            let r = rng.gen_range(0.01..1.5);
            let want: f64 = segs.iter().map(|&(a, b)| segment_in_disc(a, b, x, r)).sum();
            let got = ball_mass(&c, &Point::xy(x[0], x[1]), r).unwrap();
            assert!((got - want).abs() <= 1e-9, "seed {seed}: {got} vs {want}");
        }
    }
}

/// Fewest sub-`delta` pieces over all vertex-aligned resolutions into
/// straight runs, by enumerating every subset of interior break points.
fn brute_force_small_count(pts: &[V2], delta: f64) -> usize {
    let k = pts.len() - 1;
    let straight = |i: usize, j: usize| {
        let along: f64 = (i..j).map(|e| dist(pts[e], pts[e + 1])).sum();
        (along - dist(pts[i], pts[j])).abs() <= 1e-9 * along
    };
    let mut best = usize::MAX;
    for mask in 0u32..(1 << (k - 1)) {
        let mut cuts = vec![0];
        cuts.extend((1..k).filter(|v| mask & (1 << (v - 1)) != 0));
        cuts.push(k);
        if cuts.windows(2).all(|w| straight(w[0], w[1])) {
            let small = cuts
                .windows(2)
                .filter(|w| (w[0]..w[1]).map(|e| dist(pts[e], pts[e + 1])).sum::<f64>() < delta)
                .count();
            best = best.min(small);
        }
    }
    best
}

#[test]
fn small_edge_count_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..200 {
        // collinear runs along the x-axis with random spacing, bent at random
        let mut pts: Vec<V2> = vec![[0.0, 0.0]];
        let mut dir = [1.0, 0.0];
        while pts.len() < 10 {
            if rng.gen_bool(0.3) {
                let a: f64 = rng.gen_range(0.5..2.5);
                dir = [a.cos(), a.sin()];
            }
            let step = rng.gen_range(0.05..0.6);
            let p = pts[pts.len() - 1];
            pts.push([p[0] + step * dir[0], p[1] + step * dir[1]]);
        }
        let verts: Vec<Point> = pts.iter().map(|p| Point::xy(p[0], p[1])).collect();
        let c = Curve::from_vertices(Space::plane(), &verts, false).unwrap();
        for delta in [0.1, 0.3, 0.7, 1.5] {
            let planar_pts: Vec<V2> = planar(&c);
            assert_eq!(
                c.small_edge_count(delta),
                brute_force_small_count(&planar_pts, delta),
                "trial {trial} delta {delta}"
            );
        }
    }
}

/// Arc-length point on a closed polyline.
fn closed_point(pts: &[V2], s: f64) -> V2 {
    let segs = segments(pts, true);
    let l: f64 = segs.iter().map(|&(a, b)| dist(a, b)).sum();
    let mut left = s.rem_euclid(l);
    for (a, b) in segs {
        let len = dist(a, b);
        if left <= len {
            let t = left / len;
            return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        }
        left -= len;
    }
    pts[0]
}

/// Grid minimum of `d(γ(s), γ(s')) − ε·d_γ(s, s')` over pairs with
/// `d_γ ≥ δ`, and the certified lower bound `min − 2(1 + ε)h`.
fn lsi_grid(pts: &[V2], delta: f64, eps: f64, steps: usize) -> (f64, f64) {
    let l = common::polyline_length(pts, true);
    let h = l / steps as f64;
    let samples: Vec<V2> = (0..steps).map(|i| closed_point(pts, i as f64 * h)).collect();
    let mut min = f64::INFINITY;
    for i in 0..steps {
        for j in i + 1..steps {
            let along = ((j - i) as f64 * h).min(l - (j - i) as f64 * h);
            if along >= delta {
                min = min.min(dist(samples[i], samples[j]) - eps * along);
            }
        }
    }
    // pairs just below δ on the grid can reach δ within one step
    (min, min - 2.0 * (1.0 + eps) * h - (1.0 + eps) * h)
}

#[test]
fn lsi_agrees_with_grid_search() {
    let mut decided = 0;
    for seed in 0..30 {
        let c = if seed % 2 == 0 {
            random_walk(&Space::plane(), 12, 0.3, seed)
        } else {
            random_polygon(&Space::plane(), 6, seed)
        };
        let pts = planar(&c);
        let l = c.length();
        for (delta, eps) in [(l / 8.0, 0.2), (l / 4.0, 0.5), (l / 3.0, 0.05)] {
            let v = is_lsi(&c, delta, eps).unwrap();
            let (min, certified) = lsi_grid(&pts, delta, eps, 1500);
            let tau = 1e-9 * l;
            if min < -1e-6 {
                decided += 1;
                assert!(!v.holds, "seed {seed}: grid finds violation {min}");
            }
            if certified > tau {
                decided += 1;
                assert!(v.holds, "seed {seed}: grid certifies margin {certified}");
            }
        }
    }
    assert!(decided > 40, "only {decided} cases decided by the grid");
}

#[test]
fn unit_square_lsi_threshold() {
    // opposite midpoints are 1 apart at along-curve distance 2
    let sq = unit_square();
    assert!(is_lsi(&sq, 1.0, 0.45).unwrap().holds);
    assert!(!is_lsi(&sq, 1.0, 0.55).unwrap().holds);
}
