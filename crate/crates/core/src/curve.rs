//! Arc-length parametrized piecewise-geodesic curves.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::space::{GeodesicEdge, Leg, Point, Space};

/// Relative tolerance used when matching endpoints and deciding whether a
/// run of edges is itself a geodesic.
pub const REL_TOL: f64 = 1e-9;

/// A concatenation of canonical geodesic edges, parametrized by arc length.
///
/// Zero-length edges are never stored; a curve of total length zero has no
/// edges and sits at its base point.
#[derive(Clone, Debug)]
pub struct Curve {
    space: Space,
    edges: Vec<GeodesicEdge>,
    offsets: Vec<f64>,
    closed: bool,
    base: Point,
    /// Straight legs of all edges, built on first use.
    legs: OnceLock<Vec<CurveLeg>>,
}

impl PartialEq for Curve {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space
            && self.edges == other.edges
            && self.offsets == other.offsets
            && self.closed == other.closed
            && self.base == other.base
    }
}

/// A straight leg of a curve together with its position along the curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveLeg {
    pub leg: Leg,
    /// Arc-length parameter of the leg's start.
    pub offset: f64,
    pub edge: usize,
}

/// One piece of a resolution: the edges `first..last` merged into a single
/// geodesic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub first: usize,
    pub last: usize,
    pub start: f64,
    pub end: f64,
}

impl Piece {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

impl Curve {
    /// Builds the curve through `vertices` using canonical geodesics.
    ///
    /// For closed curves a trailing copy of the first vertex is accepted and
    /// dropped.
    pub fn from_vertices(space: Space, vertices: &[Point], closed: bool) -> Result<Curve> {
        let mut verts = vertices;
        if closed && verts.len() > 2 && verts.first() == verts.last() {
            verts = &verts[..verts.len() - 1];
        }
        if verts.len() < 2 {
            return Err(Error::TooFewVertices(verts.len()));
        }
        for v in verts {
            space.check(v)?;
        }
        for i in 1..verts.len() {
            if verts[i] == verts[i - 1] {
                return Err(Error::DuplicateVertex(i));
            }
        }
        let mut edges: Vec<GeodesicEdge> = verts
            .windows(2)
            .map(|w| space.geodesic_unchecked(w[0].clone(), w[1].clone()))
            .collect();
        if closed {
            edges.push(space.geodesic_unchecked(verts[verts.len() - 1].clone(), verts[0].clone()));
        }
        Ok(Curve::from_edges_unchecked(space, edges, closed, verts[0].clone()))
    }

    /// The zero-length curve sitting at `p`.
    pub fn point(space: Space, p: Point, closed: bool) -> Result<Curve> {
        space.check(&p)?;
        Ok(Curve::from_edges_unchecked(space, Vec::new(), closed, p))
    }

    /// Assembles a curve from edges whose endpoints already match. Zero-length
    /// edges are dropped.
    pub(crate) fn from_edges_unchecked(
        space: Space,
        edges: Vec<GeodesicEdge>,
        closed: bool,
        base: Point,
    ) -> Curve {
        let edges: Vec<GeodesicEdge> = edges.into_iter().filter(|e| e.length > 0.0).collect();
        let mut offsets = Vec::with_capacity(edges.len() + 1);
        let mut acc = 0.0;
        offsets.push(acc);
        for e in &edges {
            acc += e.length;
            offsets.push(acc);
        }
        let base = edges.first().map(|e| e.start.clone()).unwrap_or(base);
        Curve {
            space,
            edges,
            offsets,
            closed,
            base,
            legs: OnceLock::new(),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn edges(&self) -> &[GeodesicEdge] {
        &self.edges
    }

    /// Cumulative arc length at each vertex; `offsets()[i]` is where edge `i`
    /// starts and the last entry is the total length.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        *self.offsets.last().expect("offsets never empty")
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn start(&self) -> &Point {
        &self.base
    }

    pub fn end(&self) -> &Point {
        self.edges.last().map(|e| &e.end).unwrap_or(&self.base)
    }

    /// Vertex list as stored in JSON: edge starts, plus the final endpoint
    /// for open curves.
    pub fn vertices(&self) -> Vec<Point> {
        if self.edges.is_empty() {
            return vec![self.base.clone()];
        }
        let mut v: Vec<Point> = self.edges.iter().map(|e| e.start.clone()).collect();
        if !self.closed {
            v.push(self.end().clone());
        }
        v
    }

    /// Maps `t` into `[0, length)` on closed curves and clamps it into
    /// `[0, length]` on open ones.
    pub fn canonical(&self, t: f64) -> f64 {
        let l = self.length();
        if self.closed {
            if l == 0.0 {
                return 0.0;
            }
            let r = t.rem_euclid(l);
            if r >= l {
                0.0
            } else {
                r
            }
        } else {
            t.clamp(0.0, l)
        }
    }

    /// Edge index and local parameter of `t`, choosing the edge that starts
    /// at `t` when `t` is a vertex (except at the very end).
    fn locate(&self, t: f64) -> (usize, f64) {
        let k = self.edges.len();
        let i = self.offsets[1..k].partition_point(|&o| o <= t);
        (i, t - self.offsets[i])
    }

    pub fn point_at(&self, t: f64) -> Point {
        if self.edges.is_empty() {
            return self.base.clone();
        }
        let t = self.canonical(t);
        let (i, s) = self.locate(t);
        self.edges[i].point_at(s)
    }

    /// Straight legs in order along the curve.
    pub fn legs(&self) -> &[CurveLeg] {
        self.legs.get_or_init(|| {
            let mut out = Vec::with_capacity(self.edges.len());
            for (i, e) in self.edges.iter().enumerate() {
                let mut off = self.offsets[i];
                for leg in e.legs(&self.space) {
                    let len = leg.length;
                    out.push(CurveLeg {
                        leg,
                        offset: off,
                        edge: i,
                    });
                    off += len;
                }
            }
            out
        })
    }

    /// Axis-aligned bounding box of the vertices (and taxicab corners).
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.space.dim();
        let mut lo = self.base.0.clone();
        let mut hi = self.base.0.clone();
        let mut add = |p: &Point| {
            for k in 0..d {
                lo[k] = lo[k].min(p.0[k]);
                hi[k] = hi[k].max(p.0[k]);
            }
        };
        for e in &self.edges {
            add(&e.end);
            if let Some(c) = &e.corner {
                add(c);
            }
        }
        (lo, hi)
    }

    /// The open sub-curve from `a` to `b` with `0 <= a <= b <= length`.
    fn sub(&self, a: f64, b: f64) -> Vec<GeodesicEdge> {
        let mut out = Vec::new();
        if b <= a || self.edges.is_empty() {
            return out;
        }
        let k = self.edges.len();
        let ia = self.offsets[1..k].partition_point(|&o| o <= a);
        let ib = self.offsets[1..k].partition_point(|&o| o < b);
        for i in ia..=ib {
            let e = &self.edges[i];
            let lo = if i == ia { a - self.offsets[i] } else { 0.0 };
            let hi = if i == ib { b - self.offsets[i] } else { e.length };
            if lo <= 0.0 && hi >= e.length {
                out.push(e.clone());
            } else if hi > lo {
                let p = e.point_at(lo);
                let q = e.point_at(hi);
                if p != q {
                    out.push(self.space.geodesic_unchecked(p, q));
                }
            }
        }
        out
    }

    /// γ restricted to `[t, t']`, wrapping around the base point of a closed
    /// curve when `t' < t`.
    pub fn restrict(&self, t: f64, t2: f64) -> Result<Curve> {
        let l = self.length();
        for x in [t, t2] {
            if !x.is_finite() || (!self.closed && (x < 0.0 || x > l)) {
                return Err(Error::ParameterOutOfRange { t: x, length: l });
            }
        }
        let (a, b) = if self.closed {
            let a = self.canonical(t);
            let b = if t2 == l { l } else { self.canonical(t2) };
            (a, b)
        } else {
            (t, t2)
        };
        if a == b {
            return Err(Error::EmptyInterval(a));
        }
        let start = self.point_at(a);
        let edges = if b > a {
            self.sub(a, b)
        } else {
            if !self.closed {
                return Err(Error::WraparoundOnOpenCurve);
            }
            let mut e = self.sub(a, l);
            e.extend(self.sub(0.0, b));
            e
        };
        Ok(Curve::from_edges_unchecked(self.space.clone(), edges, false, start))
    }

    /// Concatenates curves whose endpoints match within
    /// [`REL_TOL`] × total length. The result is open.
    pub fn concatenate(curves: &[Curve]) -> Result<Curve> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InvalidParameter("nothing to concatenate".into()))?;
        let space = first.space.clone();
        let total: f64 = curves.iter().map(|c| c.length()).sum();
        let tol = REL_TOL * total.max(1e-300);
        let mut edges: Vec<GeodesicEdge> = Vec::new();
        let mut cursor = first.base.clone();
        for (i, c) in curves.iter().enumerate() {
            if c.space != space {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    found: c.space.dim(),
                });
            }
            let gap = space.dist(&cursor.0, &c.base.0);
            if gap > tol {
                return Err(Error::EndpointMismatch {
                    index: i.saturating_sub(1),
                    gap,
                });
            }
            for (j, e) in c.edges.iter().enumerate() {
                if j == 0 && e.start != cursor {
                    edges.push(space.geodesic_unchecked(cursor.clone(), e.end.clone()));
                } else {
                    edges.push(e.clone());
                }
            }
            cursor = c.end().clone();
        }
        Ok(Curve::from_edges_unchecked(space, edges, false, first.base.clone()))
    }

    /// Marks a curve closed, snapping the last endpoint onto the base point.
    pub fn close(mut self) -> Result<Curve> {
        if self.closed {
            return Ok(self);
        }
        let gap = self.space.dist(&self.end().0, &self.base.0);
        if gap > REL_TOL * self.length().max(1e-300) {
            return Err(Error::EndpointMismatch {
                index: self.edges.len(),
                gap,
            });
        }
        if gap > 0.0 {
            let last = self.edges.pop().expect("positive gap implies an edge");
            self.edges
                .push(self.space.geodesic_unchecked(last.start, self.base.clone()));
        }
        Ok(Curve::from_edges_unchecked(
            self.space,
            self.edges,
            true,
            self.base,
        ))
    }

    pub fn reverse(&self) -> Curve {
        let edges: Vec<GeodesicEdge> = self.edges.iter().rev().map(|e| e.reversed()).collect();
        let base = self.end().clone();
        Curve::from_edges_unchecked(self.space.clone(), edges, self.closed, base)
    }

    /// Intrinsic distance between parameters: the shorter arc on a closed
    /// curve, `|t - t'|` on an open one.
    pub fn circle_distance(&self, t: f64, t2: f64) -> f64 {
        if self.closed {
            let d = (self.canonical(t) - self.canonical(t2)).abs();
            d.min(self.length() - d)
        } else {
            (t - t2).abs()
        }
    }

    /// Whether edges `i..j` concatenate to a geodesic.
    fn run_is_geodesic(&self, i: usize, j: usize) -> bool {
        if j - i <= 1 {
            return true;
        }
        let len = self.offsets[j] - self.offsets[i];
        let d = self.space.dist(&self.edges[i].start.0, &self.edges[j - 1].end.0);
        len <= d * (1.0 + REL_TOL)
    }

    /// Longest geodesic run ending at each edge: `reach[j]` is the smallest
    /// `i` such that edges `i..=j` form a geodesic.
    fn run_reach(&self) -> Vec<usize> {
        (0..self.edges.len())
            .map(|j| {
                let mut i = j;
                while i > 0 && self.run_is_geodesic(i - 1, j + 1) {
                    i -= 1;
                }
                i
            })
            .collect()
    }

    fn pieces_from_cuts(&self, cuts: &[usize]) -> Vec<Piece> {
        cuts.windows(2)
            .map(|w| Piece {
                first: w[0],
                last: w[1],
                start: self.offsets[w[0]],
                end: self.offsets[w[1]],
            })
            .collect()
    }

    /// Greedy resolution into maximal geodesic runs, scanning forward.
    pub fn coarsest_resolution(&self) -> Vec<Piece> {
        let k = self.edges.len();
        let mut cuts = vec![0];
        let mut i = 0;
        while i < k {
            let mut j = i + 1;
            while j < k && self.run_is_geodesic(i, j + 1) {
                j += 1;
            }
            cuts.push(j);
            i = j;
        }
        self.pieces_from_cuts(&cuts)
    }

    /// A vertex-aligned resolution minimizing the number of pieces shorter
    /// than `delta`, with ties broken towards fewer pieces.
    pub fn resolution(&self, delta: f64) -> Vec<Piece> {
        let k = self.edges.len();
        if k == 0 {
            return Vec::new();
        }
        let reach = self.run_reach();
        // cost[j] = (small pieces, total pieces) for the prefix ending at vertex j
        let mut cost = vec![(usize::MAX, usize::MAX); k + 1];
        let mut prev = vec![0usize; k + 1];
        cost[0] = (0, 0);
        for j in 1..=k {
            for i in reach[j - 1]..j {
                let (s, p) = cost[i];
                let small = usize::from(self.offsets[j] - self.offsets[i] < delta);
                let c = (s + small, p + 1);
                if c < cost[j] {
                    cost[j] = c;
                    prev[j] = i;
                }
            }
        }
        let mut cuts = vec![k];
        let mut j = k;
        while j > 0 {
            j = prev[j];
            cuts.push(j);
        }
        cuts.reverse();
        self.pieces_from_cuts(&cuts)
    }

    /// m(γ, δ): the number of pieces shorter than `delta` in the best
    /// resolution.
    pub fn small_edge_count(&self, delta: f64) -> usize {
        self.resolution(delta)
            .iter()
            .filter(|p| p.length() < delta)
            .count()
    }

    /// Shortest piece of the greedy coarsest resolution.
    pub fn min_piece_length(&self) -> f64 {
        self.coarsest_resolution()
            .iter()
            .map(|p| p.length())
            .fold(f64::INFINITY, f64::min)
    }

    /// Samples the curve at `0, δ, 2δ, …` and joins the samples by geodesics.
    pub fn geodesic_sampling(&self, delta: f64) -> Result<Curve> {
        let l = self.length();
        if !(delta > 0.0 && delta < l) {
            return Err(Error::InvalidParameter(format!(
                "sampling scale {delta} must lie in (0, {l})"
            )));
        }
        let k = (l / delta).ceil() as usize;
        let pts: Vec<Point> = (0..=k)
            .map(|j| {
                let s = (j as f64 * delta).min(l);
                if j == k {
                    self.end().clone()
                } else {
                    self.point_at_open(s)
                }
            })
            .collect();
        let edges = pts
            .windows(2)
            .map(|w| self.space.geodesic_unchecked(w[0].clone(), w[1].clone()))
            .collect();
        Ok(Curve::from_edges_unchecked(
            self.space.clone(),
            edges,
            self.closed,
            self.base.clone(),
        ))
    }

    /// `point_at` without wraparound, so `t = length` gives the end point.
    pub fn point_at_open(&self, t: f64) -> Point {
        if self.edges.is_empty() {
            return self.base.clone();
        }
        let t = t.clamp(0.0, self.length());
        let (i, s) = self.locate(t);
        self.edges[i].point_at(s)
    }

    /// The same closed curve with its base point moved to parameter `t`.
    pub fn rotate(&self, t: f64) -> Result<Curve> {
        if !self.closed {
            return Err(Error::NotClosed);
        }
        let t = self.canonical(t);
        if t == 0.0 || self.edges.is_empty() {
            return Ok(self.clone());
        }
        let mut edges = self.sub(t, self.length());
        edges.extend(self.sub(0.0, t));
        Ok(Curve::from_edges_unchecked(
            self.space.clone(),
            edges,
            true,
            self.point_at(t),
        ))
    }
}
