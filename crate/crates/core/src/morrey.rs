//! Occupation-measure ball masses and certified Morrey-norm intervals.
//!
//! The Morrey norm `sup_{x,r} μ(B_r(x)) / r` is bracketed by a best-first
//! branch-and-bound over center cubes. For a cube with center `c` and
//! covering radius `ρ`, every ball `B_r(x)` with `x` in the cube lies inside
//! `B_{r+ρ}(c)`, and a geodesic piece meets a ball of radius `r` in measure
//! at most `2r`. So
//!
//! ```text
//! F(r) = Σ_pieces min(2r, μ_piece(B_{r+ρ}(c)))
//! ```
//!
//! dominates the mass, and `F(r)/r` is maximized exactly per radius interval
//! between consecutive "entry" radii (where `F` is concave).
//!
//! Near `r = 0` the ratio is bounded by counting entered pieces, or, when
//! several legs share a vertex, by the supremum for the tangent cone at that
//! vertex (scale invariant, so computed once at unit radius and cached).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::space::{Point, Space};

/// Certified bracket of the Morrey norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorreyEstimate {
    pub lo: f64,
    pub hi: f64,
    pub witness_center: Point,
    pub witness_radius: f64,
    pub tolerance_requested: f64,
    /// False when the cell budget ran out before the stopping rule fired.
    pub converged: bool,
}

/// Stopping rule for [`morrey_with`].
#[derive(Clone, Copy, Debug)]
pub enum Target {
    /// Stop once `hi - lo <= tol`; `None` means `1e-6 × lo`.
    Width(Option<f64>),
    /// Stop once `hi <= threshold` or `lo > threshold`.
    Below(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct MorreyOptions {
    pub target: Target,
    pub max_cells: usize,
}

impl Default for MorreyOptions {
    fn default() -> Self {
        MorreyOptions {
            target: Target::Width(None),
            max_cells: 400_000,
        }
    }
}

/// `μ_γ(B_r(x))`: the arc length of `γ` inside the closed ball.
pub fn ball_mass(curve: &Curve, x: &Point, r: f64) -> Result<f64> {
    curve.space().check(x)?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let space = curve.space();
    Ok(curve
        .legs()
        .iter()
        .map(|l| space.chord(&l.leg.start, &l.leg.dir, l.leg.length, &x.0, r))
        .sum())
}

/// Twice the number of pieces in the coarsest resolution.
pub fn morrey_upper_bound_edges(curve: &Curve) -> f64 {
    2.0 * curve.coarsest_resolution().len() as f64
}

/// Certified Morrey interval of width at most `tol` (default `1e-6 × lo`).
pub fn morrey_norm(curve: &Curve, tol: Option<f64>) -> MorreyEstimate {
    morrey_with(
        curve,
        MorreyOptions {
            target: Target::Width(tol),
            ..Default::default()
        },
    )
}

/// Runs the certifier only until it can decide whether the norm is at most
/// `threshold`.
pub fn certify_upper(curve: &Curve, threshold: f64) -> MorreyEstimate {
    morrey_with(
        curve,
        MorreyOptions {
            target: Target::Below(threshold),
            ..Default::default()
        },
    )
}

pub fn morrey_with(curve: &Curve, opts: MorreyOptions) -> MorreyEstimate {
    let requested = match opts.target {
        Target::Width(Some(t)) => t,
        _ => 0.0,
    };
    if curve.length() == 0.0 {
        return MorreyEstimate {
            lo: 0.0,
            hi: 0.0,
            witness_center: curve.start().clone(),
            witness_radius: 1.0,
            tolerance_requested: requested,
            converged: true,
        };
    }
    let mut est = Engine::new(curve).run(opts);
    if let Target::Width(None) = opts.target {
        est.tolerance_requested = 1e-6 * est.lo;
    }
    est
}

#[derive(Clone, Debug)]
struct LegData {
    start: Vec<f64>,
    end: Vec<f64>,
    dir: Vec<f64>,
    len: f64,
    piece: u32,
}

/// A leg seen from a cell center.
#[derive(Clone, Copy, Debug)]
struct View {
    idx: u32,
    piece: u32,
    proj: f64,
    off: f64,
    entry: f64,
}

struct Cell {
    c: Vec<f64>,
    w: f64,
    ub: f64,
    near: Rc<Vec<u32>>,
    seq: u64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.ub
            .total_cmp(&o.ub)
            .then_with(|| o.seq.cmp(&self.seq))
    }
}

#[derive(Clone, Debug)]
struct ConeSup {
    ub: f64,
    lb: f64,
    y: Vec<f64>,
}

const CONE_TOL: f64 = 1e-9;
/// Relative slack added to tangent-line bounds to absorb rounding.
const ROUND_SLACK: f64 = 1e-12;

type ConeKey = Vec<(u32, Vec<u64>)>;

struct Engine {
    space: Space,
    dim: usize,
    legs: Vec<LegData>,
    npieces: usize,
    length: f64,
    cones: HashMap<ConeKey, ConeSup>,
    best: f64,
    best_x: Vec<f64>,
    best_r: f64,
    seq: u64,
}

impl Engine {
    fn new(curve: &Curve) -> Engine {
        let pieces = curve.coarsest_resolution();
        let mut legs = Vec::new();
        let mut p = 0;
        for cl in curve.legs() {
            while cl.edge >= pieces[p].last {
                p += 1;
            }
            legs.push(LegData {
                start: cl.leg.start.clone(),
                end: cl.leg.end.clone(),
                dir: cl.leg.dir.clone(),
                len: cl.leg.length,
                piece: p as u32,
            });
        }
        Engine {
            space: curve.space().clone(),
            dim: curve.space().dim(),
            legs,
            npieces: pieces.len(),
            length: curve.length(),
            cones: HashMap::new(),
            best: 0.0,
            best_x: curve.start().0.clone(),
            best_r: 1.0,
            seq: 0,
        }
    }

    fn chord(&self, l: &LegData, x: &[f64], r: f64) -> f64 {
        self.space.chord(&l.start, &l.dir, l.len, x, r)
    }

    fn mass(&self, near: &[u32], x: &[f64], r: f64) -> f64 {
        near.iter().map(|&i| self.chord(&self.legs[i as usize], x, r)).sum()
    }

    fn probe(&mut self, near: &[u32], x: &[f64], r: f64) {
        if !(r > 0.0) {
            return;
        }
        let v = self.mass(near, x, r) / r;
        if v > self.best {
            self.best = v;
            self.best_x = x.to_vec();
            self.best_r = r;
        }
    }

    /// Chord of a viewed leg in the ball of radius `big` about the view
    /// center, with its derivative in `big`.
    fn view_chord(&self, v: &View, big: f64) -> (f64, f64) {
        if big < v.entry {
            return (0.0, 0.0);
        }
        let Some(h) = self.space.half_width(v.off, big) else {
            return (0.0, 0.0);
        };
        let len = self.legs[v.idx as usize].len;
        let a = (v.proj - h).max(0.0);
        let b = (v.proj + h).min(len);
        if b <= a {
            return (0.0, 0.0);
        }
        let ds = self.space.half_slope(big, h);
        let mut slope = 0.0;
        if v.proj + h < len {
            slope += ds;
        }
        if v.proj - h > 0.0 {
            slope += ds;
        }
        (b - a, slope)
    }

    /// `F(r) = Σ_pieces min(2r, μ_piece(B_{r+ρ}))` and a supergradient.
    /// Views must be grouped by piece.
    fn capped(&self, views: &[View], r: f64, rho: f64) -> (f64, f64) {
        let mut f = 0.0;
        let mut g = 0.0;
        let mut i = 0;
        while i < views.len() {
            let p = views[i].piece;
            let (mut m, mut s) = (0.0, 0.0);
            while i < views.len() && views[i].piece == p {
                let (c, d) = self.view_chord(&views[i], r + rho);
                m += c;
                s += d;
                i += 1;
            }
            if 2.0 * r <= m {
                f += 2.0 * r;
                g += 2.0;
            } else {
                f += m;
                g += s;
            }
        }
        (f, g)
    }

    /// `Σ_pieces min(2, μ_piece(B_big) / r)`.
    fn crude(&self, views: &[View], big: f64, r: f64) -> f64 {
        let mut total = 0.0;
        let mut i = 0;
        while i < views.len() {
            let p = views[i].piece;
            let mut m = 0.0;
            while i < views.len() && views[i].piece == p {
                m += self.view_chord(&views[i], big).0;
                i += 1;
            }
            total += (m / r).min(2.0);
        }
        total
    }

    fn run(mut self, opts: MorreyOptions) -> MorreyEstimate {
        let all: Rc<Vec<u32>> = Rc::new((0..self.legs.len() as u32).collect());
        self.seed(&all);

        let (lo_box, hi_box) = self.bbox();
        let half = self.length / 2.0;
        let c: Vec<f64> = lo_box.iter().zip(&hi_box).map(|(a, b)| 0.5 * (a + b)).collect();
        let w = lo_box
            .iter()
            .zip(&hi_box)
            .map(|(a, b)| 0.5 * (b - a))
            .fold(0.0, f64::max)
            + half;

        let mut heap = BinaryHeap::new();
        if let Some(cell) = self.make_cell(c, w, &all, &opts) {
            heap.push(cell);
        }

        let mut processed = 0usize;
        let mut converged = false;
        loop {
            let top_ub = heap.peek().map(|c: &Cell| c.ub).unwrap_or(f64::NEG_INFINITY);
            if self.should_stop(top_ub, &opts) {
                converged = true;
                break;
            }
            if processed >= opts.max_cells {
                break;
            }
            let cell = heap.pop().expect("nonempty when not stopped");
            processed += 1;
            let hw = cell.w / 2.0;
            for mask in 0..1usize << self.dim {
                let c = cell
                    .c
                    .iter()
                    .enumerate()
                    .map(|(k, x)| if mask >> k & 1 == 1 { x + hw } else { x - hw })
                    .collect();
                if let Some(ch) = self.make_cell(c, hw, &cell.near, &opts) {
                    heap.push(ch);
                }
            }
        }
        let top_ub = heap.peek().map(|c| c.ub).unwrap_or(f64::NEG_INFINITY);
        MorreyEstimate {
            lo: self.best,
            hi: top_ub.max(self.best),
            witness_center: Point(self.best_x),
            witness_radius: self.best_r,
            tolerance_requested: match opts.target {
                Target::Width(Some(t)) => t,
                _ => 0.0,
            },
            converged,
        }
    }

    fn tol(&self, opts: &MorreyOptions) -> f64 {
        match opts.target {
            Target::Width(Some(t)) => t,
            Target::Width(None) => 1e-6 * self.best,
            Target::Below(_) => 0.0,
        }
    }

    fn should_stop(&self, top_ub: f64, opts: &MorreyOptions) -> bool {
        match opts.target {
            Target::Width(_) => top_ub - self.best <= self.tol(opts),
            Target::Below(t) => top_ub.max(self.best) <= t || self.best > t,
        }
    }

    /// Level at or below which a bound needs no further sharpening.
    fn prune_level(&self, opts: &MorreyOptions) -> f64 {
        match opts.target {
            Target::Width(_) => self.best + self.tol(opts),
            Target::Below(t) => t,
        }
    }

    fn seed(&mut self, all: &Rc<Vec<u32>>) {
        // longest piece at its midpoint, radius half its length
        let mut piece_len = vec![0.0; self.npieces];
        for l in &self.legs {
            piece_len[l.piece as usize] += l.len;
        }
        let (pi, &pl) = piece_len
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("positive length curve has a piece");
        let mut acc = 0.0;
        let mut mid = None;
        for l in self.legs.iter().filter(|l| l.piece as usize == pi) {
            if acc + l.len >= pl / 2.0 {
                let a = pl / 2.0 - acc;
                mid = Some(
                    l.start
                        .iter()
                        .zip(&l.dir)
                        .map(|(s, d)| s + a * d)
                        .collect::<Vec<f64>>(),
                );
                break;
            }
            acc += l.len;
        }
        if let Some(m) = mid {
            self.probe(all, &m, pl / 2.0);
        }
        let (lo, hi) = self.bbox();
        let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let r = self
            .legs
            .iter()
            .flat_map(|l| [self.space.dist(&l.start, &c), self.space.dist(&l.end, &c)])
            .fold(0.0, f64::max);
        self.probe(all, &c, r);
    }

    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for l in &self.legs {
            for p in [&l.start, &l.end] {
                for k in 0..self.dim {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        (lo, hi)
    }

    /// Bounds `sup { μ(B_r(x)) / r : x in the cube, 0 < r ≤ L/2 }`.
    ///
    /// Between consecutive radii at which legs first meet `B_{r+ρ}(c)`, the
    /// capped mass `F` is concave in `r`, so `F(r)/r` is unimodal there and a
    /// tangent line at its numerical maximizer certifies the bound.
    fn make_cell(
        &mut self,
        c: Vec<f64>,
        w: f64,
        parent_near: &Rc<Vec<u32>>,
        opts: &MorreyOptions,
    ) -> Option<Cell> {
        let rho = self.space.cube_radius(w);
        let rmax = self.length / 2.0;
        let mut views = Vec::with_capacity(parent_near.len());
        for &i in parent_near.iter() {
            let l = &self.legs[i as usize];
            let (proj, off) = self.space.line_coords(&l.start, &l.dir, &c);
            let entry = self.space.seg_dist(proj, off, l.len);
            if entry <= rmax + rho {
                views.push(View {
                    idx: i,
                    piece: l.piece,
                    proj,
                    off,
                    entry,
                });
            }
        }
        if views.is_empty() {
            return None;
        }
        let near: Rc<Vec<u32>> = if views.len() == parent_near.len() {
            parent_near.clone()
        } else {
            Rc::new(views.iter().map(|v| v.idx).collect())
        };

        // radius breakpoints
        let mut cuts: Vec<f64> = views
            .iter()
            .map(|v| v.entry - rho)
            .filter(|&r| r > 0.0 && r < rmax)
            .collect();
        cuts.push(0.0);
        cuts.push(rmax);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut ub: f64 = 0.0;
        let entered0 = views.iter().any(|v| v.entry <= rho);
        for win in cuts.windows(2) {
            let (ra, rb) = (win[0], win[1]);
            let level = self.prune_level(opts).max(ub);
            let bound = if ra == 0.0 {
                if !entered0 {
                    continue;
                }
                let entered: Vec<View> = views.iter().copied().filter(|v| v.entry <= rho).collect();
                self.small_radius_bound(&entered, &near, &c, rb, level)
            } else {
                let crude = self.crude(&views, rb + rho, ra);
                if crude <= level {
                    crude
                } else {
                    let (a, b) = self.golden(&views, ra, rb, rho);
                    self.probe(&near, &c, 0.5 * (a + b));
                    let t = self.tangent_bound(&views, ra, rb, rho, a, b);
                    crude.min(t * (1.0 + ROUND_SLACK))
                }
            };
            ub = ub.max(bound);
        }
        self.probe(&near, &c, rho.min(rmax));
        if ub <= self.best {
            return None;
        }
        self.seq += 1;
        Some(Cell {
            c,
            w,
            ub,
            near,
            seq: self.seq,
        })
    }

    /// Bound on `F(r)/r` over `[ra, rb]` from the tangent lines of the concave
    /// `F` at `a` and `b`. Their minimum is piecewise linear, so its ratio to
    /// `r` peaks at an interval end or where the lines cross.
    fn tangent_bound(&self, views: &[View], ra: f64, rb: f64, rho: f64, a: f64, b: f64) -> f64 {
        let lines: Vec<(f64, f64, f64)> = [a, b]
            .iter()
            .map(|&x| {
                let (f, g) = self.capped(views, x, rho);
                (x, f, g)
            })
            .filter(|l| l.2.is_finite())
            .collect();
        if lines.is_empty() {
            return f64::INFINITY;
        }
        let env = |r: f64| {
            lines
                .iter()
                .map(|&(x, f, g)| f + g * (r - x))
                .fold(f64::INFINITY, f64::min)
                / r
        };
        let mut cands = vec![ra, rb];
        if let [(x1, f1, g1), (x2, f2, g2)] = lines[..] {
            if g1 != g2 {
                let r = (f2 - f1 + g1 * x1 - g2 * x2) / (g1 - g2);
                if r > ra && r < rb {
                    cands.push(r);
                }
            }
        }
        cands.into_iter().map(env).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Final bracket around the maximizer of the unimodal `F(r)/r` on
    /// `[ra, rb]`.
    fn golden(&self, views: &[View], ra: f64, rb: f64, rho: f64) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let phi = |r: f64| self.capped(views, r, rho).0 / r;
        let (mut a, mut b) = (ra, rb);
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = phi(x1);
        let mut f2 = phi(x2);
        for _ in 0..80 {
            if b - a <= 1e-10 * b {
                break;
            }
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = phi(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = phi(x1);
            }
        }
        // rounding can mislead the last comparisons; widen so the bracket
        // surely contains the maximizer
        let pad = (b - a).max(1e-10 * b);
        ((a - pad).max(ra), (b + pad).min(rb))
    }

    /// Bound for radii in `(0, rb]`, where only the `entered` legs can meet
    /// the ball. `F` is concave with `F(0) = 0` there, so the supremum is the
    /// small-radius limit: at most 2 per piece, or the tangent cone value at
    /// a shared vertex.
    fn small_radius_bound(
        &mut self,
        entered: &[View],
        near: &[u32],
        c: &[f64],
        rb: f64,
        level: f64,
    ) -> f64 {
        let mut pieces: Vec<u32> = entered.iter().map(|v| v.piece).collect();
        pieces.dedup();
        let count = 2.0 * pieces.len() as f64;
        if count <= level {
            return count;
        }
        let legs: Vec<u32> = entered.iter().map(|v| v.idx).collect();

        // apex: the endpoint shared by the most entered legs
        let mut counts: HashMap<Vec<u64>, (usize, Vec<f64>)> = HashMap::new();
        for &i in &legs {
            let l = &self.legs[i as usize];
            for p in [&l.start, &l.end] {
                let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
                counts.entry(key).or_insert((0, p.clone())).0 += 1;
            }
        }
        let apex = counts
            .into_values()
            .max_by(|a, b| {
                a.0.cmp(&b.0).then_with(|| {
                    self.space
                        .dist(&b.1, c)
                        .total_cmp(&self.space.dist(&a.1, c))
                        .then_with(|| lex(&b.1, &a.1))
                })
            })
            .map(|(_, p)| p);
        let Some(p) = apex else { return count };

        // pieces whose entered legs all touch the apex form the cone
        let mut in_cone: Vec<(u32, bool)> = Vec::new();
        for &i in &legs {
            let l = &self.legs[i as usize];
            let touches = l.start == p || l.end == p;
            match in_cone.iter_mut().find(|(q, _)| *q == l.piece) {
                Some((_, t)) => *t &= touches,
                None => in_cone.push((l.piece, touches)),
            }
        }
        let outside = in_cone.iter().filter(|(_, t)| !t).count();
        if outside == in_cone.len() {
            self.probe_crossing(&legs, near, c, rb);
            return count;
        }
        let mut rays: Vec<(u32, Vec<f64>)> = Vec::new();
        for &i in &legs {
            let l = &self.legs[i as usize];
            if !in_cone.iter().any(|(q, t)| *q == l.piece && *t) {
                continue;
            }
            let q = if l.start == p { &l.end } else { &l.start };
            let d = self.space.dist(q, &p);
            rays.push((l.piece, q.iter().zip(&p).map(|(a, b)| (a - b) / d).collect()));
        }
        let need = level - 2.0 * outside as f64;
        let cone = self.cone_sup(rays, need);
        for r in [rb, rb / 2.0] {
            let x: Vec<f64> = p.iter().zip(&cone.y).map(|(a, y)| a + r * y).collect();
            self.probe(near, &x, r);
        }
        self.probe(near, &p, rb);
        count.min(cone.ub + 2.0 * outside as f64)
    }

    /// In the plane, probe the intersection of the first two non-parallel
    /// legs' lines, where a crossing attains its ratio.
    fn probe_crossing(&mut self, legs: &[u32], near: &[u32], c: &[f64], rb: f64) {
        if self.dim != 2 || legs.len() < 2 {
            return;
        }
        let a = &self.legs[legs[0] as usize];
        for &j in &legs[1..] {
            let b = &self.legs[j as usize];
            let det = a.dir[0] * b.dir[1] - a.dir[1] * b.dir[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let dx = b.start[0] - a.start[0];
            let dy = b.start[1] - a.start[1];
            let s = (dx * b.dir[1] - dy * b.dir[0]) / det;
            let x = [a.start[0] + s * a.dir[0], a.start[1] + s * a.dir[1]];
            if self.space.dist(&x, c) <= 2.0 * rb {
                self.probe(near, &x, rb);
            }
            return;
        }
    }

    /// Supremum over `y` of `Σ_groups min(2, |B_1(y) ∩ rays of group|)` for
    /// rays from the origin. Refines only until the bound drops to `need`,
    /// is known to stay above it, or is tight.
    fn cone_sup(&mut self, mut rays: Vec<(u32, Vec<f64>)>, need: f64) -> ConeSup {
        rays.sort_by(|a, b| lex(&a.1, &b.1).then(a.0.cmp(&b.0)));
        let mut relabel: HashMap<u32, u32> = HashMap::new();
        let key: ConeKey = rays
            .iter()
            .map(|(g, d)| {
                let n = relabel.len() as u32;
                let g = *relabel.entry(*g).or_insert(n);
                (g, d.iter().map(|x| x.to_bits()).collect())
            })
            .collect();
        // each refinement at least halves the remaining gap, so a cone is
        // recomputed only logarithmically often as `need` creeps upwards
        let mut target = need;
        if let Some(hit) = self.cones.get(&key) {
            if hit.ub <= need || hit.lb > need || hit.ub - hit.lb <= CONE_TOL {
                return hit.clone();
            }
            target = need.min(0.5 * (hit.ub + hit.lb));
        }
        let rays: Vec<(u32, Vec<f64>)> = key
            .iter()
            .map(|(g, d)| (*g, d.iter().map(|b| f64::from_bits(*b)).collect()))
            .collect();
        let res = cone_bnb(&self.space, &rays, relabel.len(), target);
        self.cones.insert(key, res.clone());
        res
    }
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn cone_value(space: &Space, rays: &[(u32, Vec<f64>)], groups: usize, y: &[f64], r: f64) -> f64 {
    let zero = vec![0.0; y.len()];
    let mut per = vec![0.0; groups];
    for (g, d) in rays {
        per[*g as usize] += space.chord(&zero, d, f64::INFINITY, y, r);
    }
    per.iter().map(|m| m.min(2.0 * r)).sum::<f64>()
}

fn cone_bnb(space: &Space, rays: &[(u32, Vec<f64>)], groups: usize, need: f64) -> ConeSup {
    // distinct directions and how many groups use each
    let mut dirs: Vec<(&Vec<f64>, Vec<u32>)> = Vec::new();
    for (g, d) in rays {
        match dirs.iter_mut().find(|(e, _)| *e == d) {
            Some((_, gs)) => {
                if !gs.contains(g) {
                    gs.push(*g)
                }
            }
            None => dirs.push((d, vec![*g])),
        }
    }
    let (far_dir, far_groups) = dirs
        .iter()
        .max_by_key(|(_, gs)| gs.len())
        .map(|(d, gs)| ((*d).clone(), gs.len()))
        .expect("cone has a ray");
    let far = 2.0 * far_groups as f64;
    let far_y: Vec<f64> = far_dir.iter().map(|x| 2.0 * x).collect();
    if dirs.len() == 1 {
        return ConeSup {
            ub: far,
            lb: far,
            y: far_y,
        };
    }
    let mut sep = f64::INFINITY;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            sep = sep.min(space.dist(dirs[i].0, dirs[j].0));
        }
    }
    let r0 = 1.0 + 4.0 / sep;
    let dim = space.dim();

    let mut best = far;
    let mut best_y = far_y;
    let tol = CONE_TOL;
    let max_cells = 400_000;

    #[derive(PartialEq)]
    struct C {
        ub: f64,
        c: Vec<f64>,
        w: f64,
        seq: u64,
    }
    impl Eq for C {}
    impl PartialOrd for C {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for C {
        fn cmp(&self, o: &Self) -> Ordering {
            self.ub.total_cmp(&o.ub).then_with(|| o.seq.cmp(&self.seq))
        }
    }

    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    let mut push = |heap: &mut BinaryHeap<C>, c: Vec<f64>, w: f64, best: &mut f64, best_y: &mut Vec<f64>| {
        let rho = space.cube_radius(w);
        let v = cone_value(space, rays, groups, &c, 1.0);
        if v > *best {
            *best = v;
            *best_y = c.clone();
        }
        // each group's mass in B_{1+ρ} capped at 2 (the true radius is 1)
        let zero = vec![0.0; c.len()];
        let mut per = vec![0.0; groups];
        for (g, d) in rays {
            per[*g as usize] += space.chord(&zero, d, f64::INFINITY, &c, 1.0 + rho);
        }
        let ub: f64 = per.iter().map(|m| m.min(2.0)).sum();
        if ub > *best + tol {
            seq += 1;
            heap.push(C { ub, c, w, seq });
        }
    };
    push(&mut heap, vec![0.0; dim], r0, &mut best, &mut best_y);
    let mut n = 0;
    while let Some(top) = heap.peek() {
        if top.ub <= (best + tol).max(need) || best > need || n >= max_cells {
            break;
        }
        let cell = heap.pop().expect("peeked");
        n += 1;
        let hw = cell.w / 2.0;
        for mask in 0..1usize << dim {
            let c = cell
                .c
                .iter()
                .enumerate()
                .map(|(k, x)| if mask >> k & 1 == 1 { x + hw } else { x - hw })
                .collect();
            push(&mut heap, c, hw, &mut best, &mut best_y);
        }
    }
    let ub = heap.peek().map(|c| c.ub).unwrap_or(best).max(best) + tol;
    ConeSup {
        ub,
        lb: best,
        y: best_y,
    }
}
