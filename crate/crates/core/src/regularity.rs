//! Large-scale invertibility and small-edge density.
//!
//! Both the l.s.i. objective `d(γ(s), γ(t)) − ε·d_γ(s, t)` and the violating
//! interval search are reduced to ordered pairs of straight legs. Writing
//! `u` for the forward arc length from `s` to `t` (at most half the length
//! on closed curves, so `d_γ = u`), the objective on a leg pair is
//! `‖c − w·b + σ·(a − b)‖ − ε·u` with `w = u − D`, which is jointly convex in
//! `(σ, u)`. Its minimum over `σ` is found in closed form and the resulting
//! convex function of `u` is handled by golden section and bisection.

use serde::{Deserialize, Serialize};

use crate::curve::{Curve, CurveLeg};
use crate::error::{Error, Result};
use crate::space::{Leg, Space};

/// Relative size of the default slack `τ = 1e-9 × length`.
pub const TAU_REL: f64 = 1e-9;

/// Lipschitz constant of the per-pair profile in `u` (1 + ε from the moving
/// endpoint, 2 from the moving feasible range of `σ`).
const PROFILE_LIP: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsiVerdict {
    pub holds: bool,
    /// Parameters `(s, s')` with `d_γ(s, s') ≥ δ` and
    /// `d(γ(s), γ(s')) ≤ ε·d_γ(s, s')`.
    pub witness: Option<(f64, f64)>,
    /// When `holds`, a lower bound on the objective over the constrained
    /// region; otherwise the objective value at the witness.
    pub certified_margin: f64,
    /// The minimum landed within the certification slack of `−τ`.
    pub undecided: bool,
}

/// An interval `[t, t']` (forward, possibly wrapping) violating l.s.i., of
/// length `beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolatingInterval {
    pub t: f64,
    pub t2: f64,
    pub beta: f64,
    /// No strictly shorter interval violates by more than `τ`.
    pub minimal: bool,
}

/// A window `[t, t']` containing too many short pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseWindow {
    pub t: f64,
    pub t2: f64,
    pub length: f64,
    pub small_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenVerdict {
    pub holds: bool,
    pub window: Option<DenseWindow>,
}

fn check_params(delta: f64, eps: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Geometry of an ordered pair of legs `(A, B)` where `B` starts `d` ahead of
/// `A` along the curve.
struct Pair<'a> {
    space: &'a Space,
    a: &'a Leg,
    b: &'a Leg,
    d: f64,
    eps: f64,
}

impl Pair<'_> {
    /// Minimum of the objective over `σ` at forward gap `u`: `(σ, value)`.
    fn profile(&self, u: f64) -> (f64, f64) {
        let w = u - self.d;
        let lo = (-w).max(0.0);
        let hi = self.a.length.min(self.b.length - w).max(lo);
        let (sigma, n) = self.space.min_on_segment(
            (&self.a.start, &self.a.dir),
            (&self.b.start, &self.b.dir),
            w,
            lo,
            hi,
        );
        (sigma, n - self.eps * u)
    }

    /// Some `u ∈ [a, b]` with profile `≤ −tau`, or `None` once a certified
    /// lower bound on the bracket exceeds `−tau`. `fa` is the profile at `a`.
    fn probe(&self, mut a: f64, mut fa: f64, mut b: f64, tau: f64, tol: f64) -> Option<f64> {
        const G: f64 = 0.618_033_988_749_894_9;
        let mut fb = self.profile(b).1;
        if fb <= -tau {
            return Some(b);
        }
        let mut x1 = b - G * (b - a);
        let mut x2 = a + G * (b - a);
        let mut f1 = self.profile(x1).1;
        let mut f2 = self.profile(x2).1;
        // absorbs rounding in the convexity argument
        let slack = 0.1 * tol;
        loop {
            if f1 <= -tau {
                return Some(x1);
            }
            if f2 <= -tau {
                return Some(x2);
            }
            let lip = f1.min(f2) - PROFILE_LIP * (b - a).max(tol);
            let cvx = convex_lower([(a, fa), (x1, f1), (x2, f2), (b, fb)]) - slack;
            if lip.max(cvx) > -tau || b - a <= tol {
                return None;
            }
            if f1 <= f2 {
                (b, fb) = (x2, f2);
                (x2, f2) = (x1, f1);
                x1 = b - G * (b - a);
                f1 = self.profile(x1).1;
            } else {
                (a, fa) = (x1, f1);
                (x1, f1) = (x2, f2);
                x2 = a + G * (b - a);
                f2 = self.profile(x2).1;
            }
        }
    }

    /// Golden-section minimum on `[a, b]`: `(u, value, certified lower bound)`.
    fn minimize(&self, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, f64) {
        const G: f64 = 0.618_033_988_749_894_9;
        let mut best = (a, self.profile(a).1);
        let fb = self.profile(b).1;
        if fb < best.1 {
            best = (b, fb);
        }
        let mut x1 = b - G * (b - a);
        let mut x2 = a + G * (b - a);
        let mut f1 = self.profile(x1).1;
        let mut f2 = self.profile(x2).1;
        while b - a > tol {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - G * (b - a);
                f1 = self.profile(x1).1;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + G * (b - a);
                f2 = self.profile(x2).1;
            }
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f < best.1 {
                best = (x, f);
            }
        }
        let lower = best.1 - PROFILE_LIP * (b - a).max(tol);
        (best.0, best.1, lower)
    }
}

/// Lower bound on `[x0, x3]` for a convex function sampled at four
/// increasing points: outside a chord the function lies above the chord's
/// extension.
fn convex_lower(pts: [(f64, f64); 4]) -> f64 {
    let line = |(p, fp): (f64, f64), (q, fq): (f64, f64)| {
        let slope = if q > p { (fq - fp) / (q - p) } else { f64::NAN };
        move |x: f64| fp + slope * (x - p)
    };
    let [a, x1, x2, b] = pts;
    let mid = line(x1, x2);
    let left = mid(a.0).min(x1.1);
    let right = mid(b.0).min(x2.1);
    let (la, lb) = (line(a, x1), line(x2, b));
    let upper = |x: f64| la(x).max(lb(x));
    let mut centre = upper(x1.0).min(upper(x2.0));
    // the two chord extensions cross at most once inside [x1, x2]
    let (s1, s2) = ((x1.1 - a.1) / (x1.0 - a.0), (b.1 - x2.1) / (b.0 - x2.0));
    if s1 != s2 {
        let x = (x2.1 - s2 * x2.0 - x1.1 + s1 * x1.0) / (s1 - s2);
        if x > x1.0 && x < x2.0 {
            centre = centre.min(upper(x));
        }
    }
    let lower = left.min(right).min(centre);
    if lower.is_nan() {
        f64::NEG_INFINITY
    } else {
        lower
    }
}

/// Enumerates ordered leg pairs with their admissible `u` range and the gap
/// between their bounding boxes, in order of increasing `u` for each first
/// leg. The callback returns `false` to stop scanning the current first leg.
fn scan_pairs(
    curve: &Curve,
    legs: &[CurveLeg],
    delta: f64,
    mut f: impl FnMut(usize, usize, f64, f64, f64, f64) -> bool,
) {
    let space = curve.space();
    let l = curve.length();
    let m = legs.len();
    let umax = if curve.is_closed() { 0.5 * l } else { l };
    let boxes: Vec<_> = legs.iter().map(|g| g.leg.bbox()).collect();
    for i in 0..m {
        let a = &legs[i];
        let kmax = if curve.is_closed() { m } else { m - 1 - i };
        for k in 0..=kmax {
            let j = (i + k) % m;
            let bl = &legs[j];
            let wrap = if i + k >= m { l } else { 0.0 };
            let d = bl.offset + wrap - a.offset;
            let u0 = delta.max(d - a.leg.length);
            let u1 = umax.min(d + bl.leg.length);
            if d - a.leg.length > umax {
                break;
            }
            if u0 > u1 {
                continue;
            }
            let gap = (0..space.dim()).map(|q| {
                let (alo, ahi) = (boxes[i].0[q], boxes[i].1[q]);
                let (blo, bhi) = (boxes[j].0[q], boxes[j].1[q]);
                (blo - ahi).max(alo - bhi).max(0.0)
            });
            if !f(i, j, d, u0, u1, space.norm_iter(gap)) {
                break;
            }
        }
    }
}

/// Curve parameters for leg `i`, offset `sigma`, forward gap `u`, nudged so
/// that the recomputed curve distance is at least `delta`.
fn witness_params(curve: &Curve, legs: &[CurveLeg], i: usize, sigma: f64, u: f64, delta: f64) -> (f64, f64) {
    let s = curve.canonical(legs[i].offset + sigma);
    let mut u = u;
    let mut t = curve.canonical(s + u);
    let mut guard = 0;
    while curve.circle_distance(s, t) < delta && guard < 64 {
        u += delta * 1e-15 + f64::EPSILON * curve.length();
        t = curve.canonical(s + u);
        guard += 1;
    }
    (s, t)
}

/// Decides `(δ, ε)`-large-scale invertibility with the default slack.
pub fn is_lsi(curve: &Curve, delta: f64, eps: f64) -> Result<LsiVerdict> {
    is_lsi_with(curve, delta, eps, TAU_REL * curve.length())
}

/// Decides `(δ, ε)`-large-scale invertibility: holds when the certified
/// minimum of `d(γ(s), γ(t)) − ε·d_γ(s, t)` over `d_γ ≥ δ` exceeds `−tau`.
pub fn is_lsi_with(curve: &Curve, delta: f64, eps: f64, tau: f64) -> Result<LsiVerdict> {
    check_params(delta, eps)?;
    let l = curve.length();
    let umax = if curve.is_closed() { 0.5 * l } else { l };
    if curve.edge_count() == 0 || delta > umax {
        return Ok(LsiVerdict {
            holds: true,
            witness: None,
            certified_margin: f64::INFINITY,
            undecided: false,
        });
    }
    let legs = curve.legs();
    // collect candidate pairs with their crude bounds, then solve in order
    let mut cands = Vec::new();
    scan_pairs(curve, legs, delta, |i, j, d, u0, u1, gap| {
        cands.push((gap - eps * u1, i, j, d, u0, u1));
        true
    });
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    let tol = 1e-11 * l.max(f64::MIN_POSITIVE);
    let mut best_val = f64::INFINITY;
    let mut best_lower = f64::INFINITY;
    let mut best_at: Option<(usize, f64, f64)> = None;
    for &(crude, i, j, d, u0, u1) in &cands {
        if crude >= best_lower {
            break;
        }
        let pair = make_pair(curve.space(), &legs[i], &legs[j], d, eps);
        let (u, val, lower) = pair.minimize(u0, u1, tol);
        best_lower = best_lower.min(lower);
        if val < best_val {
            best_val = val;
            best_at = Some((i, pair.profile(u).0, u));
        }
    }
    let margin = best_lower.min(best_val);
    if margin > -tau {
        return Ok(LsiVerdict {
            holds: true,
            witness: None,
            certified_margin: margin,
            undecided: false,
        });
    }
    if best_val <= -tau {
        let (i, sigma, u) = best_at.expect("a solved pair");
        let w = witness_params(curve, legs, i, sigma, u, delta);
        return Ok(LsiVerdict {
            holds: false,
            witness: Some(w),
            certified_margin: best_val,
            undecided: false,
        });
    }
    Ok(LsiVerdict {
        holds: false,
        witness: None,
        certified_margin: margin,
        undecided: true,
    })
}

fn make_pair<'a>(space: &'a Space, a: &'a CurveLeg, b: &'a CurveLeg, d: f64, eps: f64) -> Pair<'a> {
    Pair {
        space,
        a: &a.leg,
        b: &b.leg,
        d,
        eps,
    }
}

/// The shortest interval violating l.s.i. by more than the default slack.
/// Errors when the curve is l.s.i.
pub fn minimal_violating_interval(curve: &Curve, delta: f64, eps: f64) -> Result<ViolatingInterval> {
    minimal_violating_interval_with(curve, delta, eps, TAU_REL * curve.length())?.ok_or_else(|| {
        Error::Precondition("curve is large-scale invertible; no violating interval".into())
    })
}

/// The shortest forward interval `[t, t']` with `β = length ≥ δ`,
/// `β ≤ length/2` and `d(γ(t), γ(t')) − ε·β ≤ −tau`, or `None`.
///
/// Every strictly shorter interval has objective above `−tau`, so it is
/// minimal in the sense needed for the excised loop's Morrey bound.
pub fn minimal_violating_interval_with(
    curve: &Curve,
    delta: f64,
    eps: f64,
    tau: f64,
) -> Result<Option<ViolatingInterval>> {
    check_params(delta, eps)?;
    if !curve.is_closed() {
        return Err(Error::NotClosed);
    }
    let l = curve.length();
    if curve.edge_count() == 0 || delta > 0.5 * l {
        return Ok(None);
    }
    let legs = curve.legs();
    let tol = 1e-11 * l;
    let umax = 0.5 * l;
    let mut best: Option<(usize, f64, f64)> = None;
    // short intervals first: a violation below `cap` rules out every pair
    // whose range starts at or beyond it
    let mut cap = (4.0 * delta).min(umax);
    loop {
        let mut best_u = f64::INFINITY;
        scan_pairs(curve, legs, delta, |i, j, d, u0, u1, gap| {
            if u0 >= best_u || u0 > cap {
                return false;
            }
            let u1 = u1.min(best_u).min(cap);
            if gap - eps * u1 > -tau {
                return true;
            }
            let p = make_pair(curve.space(), &legs[i], &legs[j], d, eps);
            if let Some((sigma, u)) = first_violation(&p, u0, u1, tau, tol) {
                if u < best_u {
                    best_u = u;
                    best = Some((i, sigma, u));
                }
            }
            true
        });
        if best.is_some() || cap >= umax {
            break;
        }
        cap = (2.0 * cap).min(umax);
    }
    Ok(best.map(|(i, sigma, u)| {
        let (t, t2) = witness_params(curve, legs, i, sigma, u, delta);
        ViolatingInterval {
            t,
            t2,
            beta: u,
            minimal: true,
        }
    }))
}

/// Smallest `u ∈ [u0, u1]` with profile `≤ −tau`, as `(σ, u)`.
fn first_violation(p: &Pair, u0: f64, u1: f64, tau: f64, tol: f64) -> Option<(f64, f64)> {
    let (s0, f0) = p.profile(u0);
    if f0 <= -tau {
        return Some((s0, u0));
    }
    let um = p.probe(u0, f0, u1, tau, tol)?;
    // profile is convex and so non-increasing on [u0, um]
    let (mut lo, mut hi) = (u0, um);
    while hi - lo > 1e-3 * tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p.profile(mid).1 <= -tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((p.profile(hi).0, hi))
}

/// Checks the `(δ, ε, n)` condition on the best resolution: every window of
/// length at most `2δ/ε` fully contains at most `n` pieces shorter than `δ`.
/// On failure the window spans exactly `n + 1` short pieces.
pub fn is_den_curve(curve: &Curve, delta: f64, eps: f64, n: usize) -> Result<DenVerdict> {
    check_params(delta, eps)?;
    let pieces = curve.resolution(delta);
    let small: Vec<usize> = (0..pieces.len()).filter(|&i| pieces[i].length() < delta).collect();
    let c = small.len();
    let ok = DenVerdict {
        holds: true,
        window: None,
    };
    if c <= n {
        return Ok(ok);
    }
    let l = curve.length();
    let span = 2.0 * delta / eps;
    let starts = if curve.is_closed() { c } else { c - n };
    for i in 0..starts {
        let j = i + n;
        let start = pieces[small[i]].start;
        let mut end = pieces[small[j % c]].end;
        if j >= c {
            end += l;
        }
        let length = end - start;
        if length <= span {
            let t2 = if end >= l { end - l } else { end };
            return Ok(DenVerdict {
                holds: false,
                window: Some(DenseWindow {
                    t: start,
                    t2,
                    length,
                    small_edges: n + 1,
                }),
            });
        }
    }
    Ok(ok)
}
