//! Geodesic metric spaces with a canonical choice of geodesic.
//!
//! Two instances are provided: Euclidean space of any dimension and the
//! taxicab plane (ℝ² with the ℓ¹ metric). Both are normed spaces in which
//! every canonical geodesic is a concatenation of at most two straight
//! [`Leg`]s, which is what the occupation-measure and regularity code works
//! with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point(vec![x, y])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Lexicographic comparison on coordinates.
    pub fn lex_le(&self, other: &Point) -> bool {
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return true;
            }
            if a > b {
                return false;
            }
        }
        true
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point(c.to_vec())
    }
}

/// The ambient space. Serialized as `{"type":"euclidean","dim":N}` or
/// `{"type":"taxicab"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Space {
    Euclidean { dim: usize },
    Taxicab,
}

impl Space {
    pub fn euclidean(dim: usize) -> Self {
        Space::Euclidean { dim }
    }

    pub fn plane() -> Self {
        Space::Euclidean { dim: 2 }
    }

    pub fn taxicab() -> Self {
        Space::Taxicab
    }

    pub fn dim(&self) -> usize {
        match self {
            Space::Euclidean { dim } => *dim,
            Space::Taxicab => 2,
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        if !p.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Norm of a coordinate difference vector.
    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            Space::Euclidean { .. } => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
            Space::Taxicab => v.iter().map(|c| c.abs()).sum(),
        }
    }

    /// Distance between raw coordinate slices of matching dimension.
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Space::Euclidean { .. } => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Space::Taxicab => p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum(),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.dist(&p.0, &q.0))
    }

    /// Radius (in this metric) of the ℓ∞ cube of half-width `w`.
    pub fn cube_radius(&self, w: f64) -> f64 {
        match self {
            Space::Euclidean { dim } => w * (*dim as f64).sqrt(),
            Space::Taxicab => 2.0 * w,
        }
    }

    /// The canonical geodesic from `p` to `q`.
    ///
    /// In the taxicab plane this is the L-path that moves along the x-axis
    /// first when starting from the lexicographically smaller endpoint, so
    /// `geodesic(q, p)` is exactly the reversal of `geodesic(p, q)`.
    pub fn geodesic(&self, p: &Point, q: &Point) -> Result<GeodesicEdge> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.geodesic_unchecked(p.clone(), q.clone()))
    }

    pub(crate) fn geodesic_unchecked(&self, start: Point, end: Point) -> GeodesicEdge {
        let length = self.dist(&start.0, &end.0);
        let corner = match self {
            Space::Euclidean { .. } => None,
            Space::Taxicab => {
                let c = if start.lex_le(&end) {
                    Point::xy(end.0[0], start.0[1])
                } else {
                    Point::xy(start.0[0], end.0[1])
                };
                if c == start || c == end {
                    None
                } else {
                    Some(c)
                }
            }
        };
        GeodesicEdge {
            start,
            end,
            length,
            corner,
        }
    }

    /// Length of `{a ∈ [0, len] : d(start + a·dir, x) ≤ r}` for a straight
    /// leg with unit direction `dir`. `len` may be infinite (a ray).
    pub fn chord(&self, start: &[f64], dir: &[f64], len: f64, x: &[f64], r: f64) -> f64 {
        match self.chord_interval(start, dir, len, x, r) {
            Some((a, b)) => b - a,
            None => 0.0,
        }
    }

    pub(crate) fn chord_interval(
        &self,
        start: &[f64],
        dir: &[f64],
        len: f64,
        x: &[f64],
        r: f64,
    ) -> Option<(f64, f64)> {
        if r < 0.0 {
            return None;
        }
        let (center, off) = self.line_coords(start, dir, x);
        let half = self.half_width(off, r)?;
        let a = (center - half).max(0.0);
        let b = (center + half).min(len);
        if b > a {
            Some((a, b))
        } else {
            None
        }
    }

    /// Position of the foot of `x` along the line `start + a·dir`, and the
    /// offset of `x` from that line. Taxicab legs must be axis-aligned.
    pub(crate) fn line_coords(&self, start: &[f64], dir: &[f64], x: &[f64]) -> (f64, f64) {
        match self {
            Space::Euclidean { .. } => {
                let proj: f64 = x
                    .iter()
                    .zip(start)
                    .zip(dir)
                    .map(|((xi, si), di)| (xi - si) * di)
                    .sum();
                let perp2: f64 = x
                    .iter()
                    .zip(start)
                    .zip(dir)
                    .map(|((xi, si), di)| {
                        let v = xi - si - proj * di;
                        v * v
                    })
                    .sum();
                (proj, perp2.sqrt())
            }
            Space::Taxicab => {
                let axis = if dir[0] != 0.0 { 0 } else { 1 };
                let other = 1 - axis;
                (
                    (x[axis] - start[axis]) * dir[axis],
                    (x[other] - start[other]).abs(),
                )
            }
        }
    }

    /// Half-length of the intersection of the ball `B_r` with a line at
    /// offset `off` from its center.
    pub(crate) fn half_width(&self, off: f64, r: f64) -> Option<f64> {
        if off > r {
            return None;
        }
        Some(match self {
            Space::Euclidean { .. } => ((r - off) * (r + off)).sqrt(),
            Space::Taxicab => r - off,
        })
    }

    /// Derivative of [`Space::half_width`] in `r`.
    pub(crate) fn half_slope(&self, r: f64, half: f64) -> f64 {
        match self {
            Space::Euclidean { .. } => {
                if half > 0.0 {
                    r / half
                } else {
                    f64::INFINITY
                }
            }
            Space::Taxicab => 1.0,
        }
    }

    /// Distance from a point with line coordinates `(proj, off)` to the
    /// segment `[0, len]` of that line.
    pub(crate) fn seg_dist(&self, proj: f64, off: f64, len: f64) -> f64 {
        let along = if proj < 0.0 {
            -proj
        } else if proj > len {
            proj - len
        } else {
            0.0
        };
        match self {
            Space::Euclidean { .. } => off.hypot(along),
            Space::Taxicab => off + along,
        }
    }

    /// Minimizes `‖e + σv‖` over `σ ∈ [lo, hi]`, returning `(σ, value)`.
    /// The norm of an affine path is convex, so the minimum sits at an
    /// endpoint or at the unique stationary point (Euclidean) or one of the
    /// coordinate kinks (taxicab).
    /// Norm of a vector given by its coordinates.
    pub(crate) fn norm_iter(&self, v: impl Iterator<Item = f64>) -> f64 {
        match self {
            Space::Euclidean { .. } => v.map(|c| c * c).sum::<f64>().sqrt(),
            Space::Taxicab => v.map(f64::abs).sum(),
        }
    }

    /// Minimizes `‖(p − q) − w·dq + σ·(dp − dq)‖` over `σ ∈ [lo, hi]`, the
    /// distance between `p + σ·dp` and `q + (σ + w)·dq`: `(σ, value)`.
    pub(crate) fn min_on_segment(
        &self,
        (p, dp): (&[f64], &[f64]),
        (q, dq): (&[f64], &[f64]),
        w: f64,
        lo: f64,
        hi: f64,
    ) -> (f64, f64) {
        let e = |k: usize| p[k] - q[k] - w * dq[k];
        let v = |k: usize| dp[k] - dq[k];
        let dim = p.len();
        let eval = |s: f64| self.norm_iter((0..dim).map(|k| e(k) + s * v(k)));
        match self {
            Space::Euclidean { .. } => {
                // convex quadratic in σ: the clamped vertex is the minimum
                let (mut ev, mut vv) = (0.0, 0.0);
                for k in 0..dim {
                    ev += e(k) * v(k);
                    vv += v(k) * v(k);
                }
                let s = if vv > 0.0 { (-ev / vv).clamp(lo, hi) } else { lo };
                (s, eval(s))
            }
            Space::Taxicab => {
                let mut best = (lo, eval(lo));
                let mut try_at = |s: f64| {
                    let s = s.clamp(lo, hi);
                    let val = eval(s);
                    if val < best.1 {
                        best = (s, val);
                    }
                };
                try_at(hi);
                for k in 0..dim {
                    if v(k) != 0.0 {
                        try_at(-e(k) / v(k));
                    }
                }
                best
            }
        }
    }
}

/// A straight piece of a geodesic edge, parametrized by arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct Leg {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Unit vector in the space's norm.
    pub dir: Vec<f64>,
    pub length: f64,
}

impl Leg {
    pub(crate) fn new(space: &Space, start: &[f64], end: &[f64]) -> Self {
        let length = space.dist(start, end);
        let dir = if length > 0.0 {
            start.iter().zip(end).map(|(a, b)| (b - a) / length).collect()
        } else {
            vec![0.0; start.len()]
        };
        Leg {
            start: start.to_vec(),
            end: end.to_vec(),
            dir,
            length,
        }
    }

    /// Writes the point at arc length `a` into `out`.
    pub fn point_into(&self, a: f64, out: &mut [f64]) {
        let f = (a / self.length).clamp(0.0, 1.0);
        if f >= 1.0 {
            out.copy_from_slice(&self.end);
            return;
        }
        for ((o, s), e) in out.iter_mut().zip(&self.start).zip(&self.end) {
            *o = s + f * (e - s);
        }
    }

    pub fn point_at(&self, a: f64) -> Vec<f64> {
        if a <= 0.0 {
            return self.start.clone();
        }
        if a >= self.length {
            return self.end.clone();
        }
        let f = a / self.length;
        self.start
            .iter()
            .zip(&self.end)
            .map(|(s, e)| s + f * (e - s))
            .collect()
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self.start.iter().zip(&self.end).map(|(a, b)| a.min(*b)).collect();
        let hi = self.start.iter().zip(&self.end).map(|(a, b)| a.max(*b)).collect();
        (lo, hi)
    }
}

/// A canonical geodesic between two points.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicEdge {
    pub start: Point,
    pub end: Point,
    pub length: f64,
    /// Breakpoint of an L-shaped taxicab geodesic.
    pub corner: Option<Point>,
}

impl GeodesicEdge {
    pub fn legs(&self, space: &Space) -> Vec<Leg> {
        let mut out = Vec::with_capacity(2);
        match &self.corner {
            None => {
                if self.length > 0.0 {
                    out.push(Leg::new(space, &self.start.0, &self.end.0));
                }
            }
            Some(c) => {
                out.push(Leg::new(space, &self.start.0, &c.0));
                out.push(Leg::new(space, &c.0, &self.end.0));
            }
        }
        out
    }

    pub fn point_at(&self, s: f64) -> Point {
        if s <= 0.0 {
            return self.start.clone();
        }
        if s >= self.length {
            return self.end.clone();
        }
        match &self.corner {
            None => Point(lerp(&self.start.0, &self.end.0, s / self.length)),
            Some(c) => {
                let first: f64 = self
                    .start
                    .0
                    .iter()
                    .zip(&c.0)
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                if s <= first {
                    Point(lerp(&self.start.0, &c.0, s / first))
                } else {
                    let second = self.length - first;
                    Point(lerp(&c.0, &self.end.0, ((s - first) / second).min(1.0)))
                }
            }
        }
    }

    pub fn reversed(&self) -> GeodesicEdge {
        GeodesicEdge {
            start: self.end.clone(),
            end: self.start.clone(),
            length: self.length,
            corner: self.corner.clone(),
        }
    }
}

fn lerp(a: &[f64], b: &[f64], f: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + f * (y - x)).collect()
}
