//! Reference computations for the integration tests. Everything here works
//! from raw planar vertex lists and never calls the library's geometry,
//! ball-mass or quadrature code.
#![allow(dead_code)]

use curve_surgery::Curve;

pub type V2 = [f64; 2];

pub fn dist(a: V2, b: V2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Planar vertices of a curve in the Euclidean plane.
pub fn planar(curve: &Curve) -> Vec<V2> {
    curve
        .vertices()
        .iter()
        .map(|p| [p.coords()[0], p.coords()[1]])
        .collect()
}

/// Consecutive vertex pairs, including the closing one for closed curves.
pub fn segments(pts: &[V2], closed: bool) -> Vec<(V2, V2)> {
    let mut out: Vec<(V2, V2)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    if closed && pts.len() > 1 {
        out.push((pts[pts.len() - 1], pts[0]));
    }
    out
}

pub fn polyline_length(pts: &[V2], closed: bool) -> f64 {
    segments(pts, closed).iter().map(|&(a, b)| dist(a, b)).sum()
}

/// Length of the segment `[a, b]` inside the closed disc `B(c, r)`.
pub fn segment_in_disc(a: V2, b: V2, c: V2, r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len = d[0].hypot(d[1]);
    if len == 0.0 {
        return 0.0;
    }
    let u = [d[0] / len, d[1] / len];
    let w = [a[0] - c[0], a[1] - c[1]];
    let p = w[0] * u[0] + w[1] * u[1];
    let q = w[0] * w[0] + w[1] * w[1] - r * r;
    let disc = p * p - q;
    if disc < 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    ((-p + sq).min(len) - (-p - sq).max(0.0)).max(0.0)
}

fn ratio(segs: &[(V2, V2)], c: V2, r: f64) -> f64 {
    segs.iter().map(|&(a, b)| segment_in_disc(a, b, c, r)).sum::<f64>() / r
}

/// Best ratio over radii for a fixed center: the mass/radius profile is
/// smooth between the distances to the vertices, so sample every gap and
/// polish the best sample by golden section.
fn best_radius(segs: &[(V2, V2)], c: V2) -> (f64, f64) {
    let mut radii: Vec<f64> = segs
        .iter()
        .flat_map(|&(a, b)| [dist(a, c), dist(b, c)])
        .filter(|r| *r > 1e-12)
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut best = (0.0, 1.0);
    let mut lo = radii.first().copied().unwrap_or(1.0) * 1e-3;
    for &hi in &radii {
        for k in 1..=8 {
            let r = lo + (hi - lo) * k as f64 / 8.0;
            let v = ratio(segs, c, r);
            if v > best.0 {
                best = (v, r);
            }
        }
        lo = hi;
    }
    // golden section on the bracket around the best sample
    let step = best.1 * 0.1;
    let (mut a, mut b) = ((best.1 - step).max(1e-12), best.1 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if ratio(segs, c, x1) >= ratio(segs, c, x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let r = 0.5 * (a + b);
    let v = ratio(segs, c, r);
    if v > best.0 {
        best = (v, r);
    }
    best
}

/// Brute-force Morrey norm of a closed planar polygon: a center grid of
/// spacing 1/100 plus vertices, midpoints, edge crossings and
/// circumcenters, a shrinking pattern search around the best twelve
/// centers, and a line search along every vertex-pair bisector. Every value it
/// reports is an attained ratio, so it never exceeds the true norm.
pub fn morrey_oracle(pts: &[V2]) -> f64 {
    let segs = segments(pts, true);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let h = 0.01;
    let mut centers: Vec<V2> = Vec::new();
    let nx = ((hi[0] - lo[0]) / h).ceil() as usize + 1;
    let ny = ((hi[1] - lo[1]) / h).ceil() as usize + 1;
    for i in 0..=nx {
        for j in 0..=ny {
            centers.push([lo[0] + i as f64 * h, lo[1] + j as f64 * h]);
        }
    }
    for &(a, b) in &segs {
        centers.push(a);
        centers.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }
    for (i, &(a, b)) in segs.iter().enumerate() {
        for &(c, d) in &segs[i + 1..] {
            if let Some(x) = crossing(a, b, c, d) {
                centers.push(x);
            }
        }
    }
    let verts: Vec<V2> = segs.iter().map(|s| s.0).collect();
    for (i, &a) in verts.iter().enumerate() {
        for (j, &b) in verts.iter().enumerate().skip(i + 1) {
            for &c in &verts[j + 1..] {
                if let Some(x) = circumcenter(a, b, c) {
                    centers.push(x);
                }
            }
        }
    }
    let mut scored: Vec<(f64, V2)> = centers.iter().map(|&c| (best_radius(&segs, c).0, c)).collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut best = scored[0].0;
    for &(v0, c0) in scored.iter().take(12) {
        let (mut v, mut c) = (v0, c0);
        let mut step = h;
        while step > 1e-9 {
            let mut moved = false;
            for (dx, dy) in [(1., 0.), (-1., 0.), (0., 1.), (0., -1.), (1., 1.), (1., -1.), (-1., 1.), (-1., -1.)] {
                let t = [c[0] + dx * step, c[1] + dy * step];
                let vt = best_radius(&segs, t).0;
                if vt > v {
                    (v, c) = (vt, t);
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.max(v);
    }
    // ridges where the ball boundary passes through two vertices at once
    let reach = 2.0 * dist(lo, hi) + 1.0;
    for (i, &a) in verts.iter().enumerate() {
        for &b in &verts[i + 1..] {
            for side in [1.0, -1.0] {
                best = best.max(bisector_search(&segs, a, b, side, reach));
            }
        }
    }
    best
}

/// Best ratio over balls whose boundary contains both `a` and `b`, with
/// centers on one half of the perpendicular bisector.
fn bisector_search(segs: &[(V2, V2)], a: V2, b: V2, side: f64, reach: f64) -> f64 {
    let half = 0.5 * dist(a, b);
    if half == 0.0 {
        return 0.0;
    }
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let nrm = [-(b[1] - a[1]) / (2.0 * half), (b[0] - a[0]) / (2.0 * half)];
    // offset t along the bisector; radius grows as hypot(half, t)
    let at = |t: f64| {
        let c = [mid[0] + side * t * nrm[0], mid[1] + side * t * nrm[1]];
        ratio(segs, c, half.hypot(t) * (1.0 + 1e-12))
    };
    let samples = 400;
    let mut best = (at(0.0), 0.0);
    for k in 1..=samples {
        let t = reach * (k as f64 / samples as f64).powi(2);
        let v = at(t);
        if v > best.0 {
            best = (v, t);
        }
    }
    let step = reach * (2.0 / samples as f64);
    let (mut lo, mut hi) = ((best.1 - step).max(0.0), best.1 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if at(x1) >= at(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.0.max(at(0.5 * (lo + hi)))
}

fn circumcenter(a: V2, b: V2, c: V2) -> Option<V2> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-12 {
        return None;
    }
    let (a2, b2, c2) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1], c[0] * c[0] + c[1] * c[1]);
    Some([
        (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
        (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
    ])
}

fn crossing(a: V2, b: V2, c: V2, d: V2) -> Option<V2> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den.abs() < 1e-15 {
        return None;
    }
    let q = [c[0] - a[0], c[1] - a[1]];
    let t = (q[0] * s[1] - q[1] * s[0]) / den;
    let u = (q[0] * r[1] - q[1] * r[0]) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| [a[0] + t * r[0], a[1] + t * r[1]])
}

/// Trapezoid sum for `∫ f dπ` along a polygonal path, each segment split
/// into steps of length at most `h`. Returns the sum and the error bound
/// `lip_f · lip_π · h · length / 2`.
pub fn rs_sum(
    pts: &[V2],
    closed: bool,
    f: &dyn Fn(V2) -> f64,
    pi: &dyn Fn(V2) -> f64,
    h: f64,
    lips: (f64, f64),
) -> (f64, f64) {
    let mut total = 0.0;
    let mut length = 0.0;
    for (a, b) in segments(pts, closed) {
        let len = dist(a, b);
        length += len;
        let k = ((len / h).ceil() as usize).max(1);
        let at = |j: usize| {
            if j == k {
                return b;
            }
            let t = j as f64 / k as f64;
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        };
        let mut prev = (f(a), pi(a));
        for j in 1..=k {
            let x = at(j);
            let cur = (f(x), pi(x));
            total += 0.5 * (prev.0 + cur.0) * (cur.1 - prev.1);
            prev = cur;
        }
    }
    (total, lips.0 * lips.1 * h * length / 2.0)
}

/// A test-side cone `max(0, r − |x − e|)`, 1-Lipschitz.
pub fn cone(e: V2, r: f64) -> impl Fn(V2) -> f64 {
    move |x| (r - dist(x, e)).max(0.0)
}

pub type Scalar = Box<dyn Fn(V2) -> f64>;

/// Fifty `(cone, coordinate)` forms over a 5×5 grid of apexes spanning the
/// box `[lo, hi]`; all have both Lipschitz constants equal to one.
pub fn cone_battery(lo: V2, hi: V2) -> Vec<(Scalar, Scalar)> {
    let diam = dist(lo, hi).max(1e-9);
    let mut out: Vec<(Scalar, Scalar)> = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            let e = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / 5.0,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / 5.0,
            ];
            for k in 0..2 {
                out.push((Box::new(cone(e, 0.5 * diam)), Box::new(move |x: V2| x[k])));
            }
        }
    }
    out
}

pub fn bbox(pts: &[V2]) -> (V2, V2) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Shortest run in the greedy forward merge of edges into straight runs,
/// a run being accepted while its length matches the endpoint distance to
/// a relative 1e-9.
pub fn coarsest_min_piece(pts: &[V2], closed: bool) -> f64 {
    let segs = segments(pts, closed);
    let mut best = f64::INFINITY;
    let mut i = 0;
    while i < segs.len() {
        let mut len = dist(segs[i].0, segs[i].1);
        let mut j = i + 1;
        while j < segs.len() {
            let grown = len + dist(segs[j].0, segs[j].1);
            if (grown - dist(segs[i].0, segs[j].1)).abs() > 1e-9 * grown {
                break;
            }
            len = grown;
            j += 1;
        }
        best = best.min(len);
        i = j;
    }
    best
}
