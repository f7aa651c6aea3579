//! Weighted curve currents evaluated against Lipschitz test forms.
//!
//! `[[γ]](f, π) = ∫ f(γ(t)) d(π∘γ)(t)` is approximated by a trapezoid
//! Riemann–Stieltjes sum on a partition that contains every leg endpoint
//! plus a uniform grid of `m` steps. The sum is exact when `f` and `π` are
//! affine along legs, and the error per curve is at most
//! `Lip f · Lip π · length² / m`.

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::space::{Point, Space};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A scalar function with declared bounds: `|g| ≤ sup` and
/// `|g(x) − g(y)| ≤ lip · d(x, y)`.
#[derive(Clone)]
pub struct Lipschitz {
    pub func: ScalarFn,
    pub sup: f64,
    pub lip: f64,
    pub label: String,
}

impl fmt::Debug for Lipschitz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lipschitz")
            .field("label", &self.label)
            .field("sup", &self.sup)
            .field("lip", &self.lip)
            .finish()
    }
}

impl Lipschitz {
    pub fn new(label: impl Into<String>, sup: f64, lip: f64, func: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Lipschitz {
            func: Arc::new(func),
            sup,
            lip,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Lipschitz::new(format!("const {c}"), c.abs(), 0.0, move |_| c)
    }

    /// The `k`-th coordinate; 1-Lipschitz in both instances, unbounded.
    pub fn coordinate(k: usize) -> Self {
        Lipschitz::new(format!("x{k}"), f64::INFINITY, 1.0, move |x| x[k])
    }

    /// `τ_M(max_j (c_j − C·d(x, e_j)))` with `τ_M` the clamp to `[−M, M]`.
    pub fn cone(space: &Space, centers: &[Point], levels: &[f64], slope: f64, trunc: f64) -> Result<Self> {
        if centers.is_empty() || centers.len() != levels.len() {
            return Err(Error::InvalidParameter(
                "cone needs one level per center and at least one center".into(),
            ));
        }
        if !(slope >= 0.0 && trunc >= 0.0) {
            return Err(Error::InvalidParameter("slope and truncation must be non-negative".into()));
        }
        for c in centers {
            space.check(c)?;
        }
        let space = space.clone();
        let pts: Vec<Vec<f64>> = centers.iter().map(|p| p.0.clone()).collect();
        let lv = levels.to_vec();
        let label = format!("cone l={} C={slope} M={trunc}", centers.len());
        Ok(Lipschitz::new(label, trunc, slope, move |x| {
            let peak = pts
                .iter()
                .zip(&lv)
                .map(|(e, c)| c - slope * space.dist(x, e))
                .fold(f64::NEG_INFINITY, f64::max);
            peak.clamp(-trunc, trunc)
        }))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.func)(x)
    }
}

/// A test form `(f, π)`.
#[derive(Clone, Debug)]
pub struct TestForm {
    pub f: Lipschitz,
    pub pi: Lipschitz,
}

impl TestForm {
    pub fn new(f: Lipschitz, pi: Lipschitz) -> Self {
        TestForm { f, pi }
    }

    /// Checks the declared constants of both functions on `pairs` random
    /// point pairs drawn from the box `[lo, hi]`.
    pub fn audit(&self, space: &Space, lo: &[f64], hi: &[f64], pairs: usize, seed: u64) -> Result<()> {
        audit_fn(&self.f, space, lo, hi, pairs, seed)?;
        audit_fn(&self.pi, space, lo, hi, pairs, seed ^ 0x9e37_79b9)
    }
}

fn audit_fn(g: &Lipschitz, space: &Space, lo: &[f64], hi: &[f64], pairs: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        lo.iter()
            .zip(hi)
            .map(|(a, b)| if b > a { rng.gen_range(*a..*b) } else { *a })
            .collect()
    };
    for _ in 0..pairs {
        let x = draw(&mut rng);
        // half the pairs are close together to probe the local slope
        let y = if rng.gen_bool(0.5) {
            draw(&mut rng)
        } else {
            x.iter().map(|v| v + rng.gen_range(-1e-3..1e-3)).collect()
        };
        let (gx, gy) = (g.eval(&x), g.eval(&y));
        let scale = 1e-12 * (1.0 + gx.abs().max(gy.abs()));
        if gx.abs() > g.sup + scale || gy.abs() > g.sup + scale {
            return Err(Error::FormAudit(format!("{}: |g| exceeds declared bound {}", g.label, g.sup)));
        }
        let d = space.dist(&x, &y);
        if (gx - gy).abs() > g.lip * d * (1.0 + 1e-12) + scale {
            return Err(Error::FormAudit(format!(
                "{}: slope {} exceeds declared Lipschitz constant {}",
                g.label,
                (gx - gy).abs() / d,
                g.lip
            )));
        }
    }
    Ok(())
}

/// A finite sum `Σ λ_i [[γ_i]]`.
#[derive(Clone, Debug, Default)]
pub struct WeightedCurrent {
    pub atoms: Vec<(f64, Curve)>,
}

/// A quadrature value with its error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error_bound: f64,
}

impl WeightedCurrent {
    pub fn new(atoms: Vec<(f64, Curve)>) -> Self {
        WeightedCurrent { atoms }
    }

    pub fn single(curve: Curve) -> Self {
        WeightedCurrent::new(vec![(1.0, curve)])
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `Σ |λ_i| · length(γ_i)`, an upper bound for the mass.
    pub fn mass_upper_bound(&self) -> f64 {
        self.atoms.iter().map(|(l, c)| l.abs() * c.length()).sum()
    }

    /// `self − other`, as a formal sum.
    pub fn minus(&self, other: &WeightedCurrent) -> WeightedCurrent {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().map(|(l, c)| (-l, c.clone())));
        WeightedCurrent { atoms }
    }

    pub fn evaluate(&self, form: &TestForm, m: usize) -> Result<Evaluation> {
        evaluate(self, form, m)
    }

    /// Evaluation with a common grid step `h` on every curve.
    pub fn evaluate_step(&self, form: &TestForm, h: f64) -> Result<Evaluation> {
        evaluate_step(self, form, h)
    }

    pub fn max_length(&self) -> f64 {
        self.atoms.iter().map(|(_, c)| c.length()).fold(0.0, f64::max)
    }
}

/// Trapezoid Riemann–Stieltjes sum for one curve.
pub fn evaluate_curve(curve: &Curve, form: &TestForm, m: usize) -> Result<Evaluation> {
    if m == 0 {
        return Err(Error::InvalidParameter("partition count must be at least 1".into()));
    }
    let l = curve.length();
    let h = l / m as f64;
    let mut value = 0.0;
    let mut x = vec![0.0; curve.space().dim()];
    for cl in curve.legs() {
        let leg = &cl.leg;
        let (o, len) = (cl.offset, leg.length);
        let (mut fp, mut pp) = (form.f.eval(&leg.start), form.pi.eval(&leg.start));
        // uniform grid points strictly inside the leg, then its end
        let mut j = (o / h).floor() as usize + 1;
        loop {
            let t = j as f64 * h;
            let last = t >= o + len || j > m;
            let (fx, px) = if last {
                (form.f.eval(&leg.end), form.pi.eval(&leg.end))
            } else {
                leg.point_into(t - o, &mut x);
                (form.f.eval(&x), form.pi.eval(&x))
            };
            value += 0.5 * (fp + fx) * (px - pp);
            if last {
                break;
            }
            fp = fx;
            pp = px;
            j += 1;
        }
    }
    Ok(Evaluation {
        value,
        error_bound: form.f.lip * form.pi.lip * l * l / m as f64,
    })
}

/// `Σ λ_i [[γ_i]](f, π)` with the summed quadrature error bounds.
/// Like [`evaluate`], but each curve gets `⌈length / h⌉` grid steps, so
/// many short curves cost no more than one long one.
pub fn evaluate_step(current: &WeightedCurrent, form: &TestForm, h: f64) -> Result<Evaluation> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {h}")));
    }
    let mut out = Evaluation {
        value: 0.0,
        error_bound: 0.0,
    };
    for (lambda, c) in &current.atoms {
        let m = ((c.length() / h).ceil() as usize).max(1);
        let e = evaluate_curve(c, form, m)?;
        out.value += lambda * e.value;
        out.error_bound += lambda.abs() * e.error_bound;
    }
    Ok(out)
}

/// Largest ratio `|diff(ω)| / (quadrature bound + rounding allowance)` over
/// a battery, with the grid step set to the longest curve over `partition`.
pub fn discrepancy_ratio(diff: &WeightedCurrent, battery: &[TestForm], partition: usize) -> Result<f64> {
    let scale = diff.mass_upper_bound();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let h = diff.max_length() / partition.max(1) as f64;
    let ratios = battery
        .par_iter()
        .map(|form| {
            let e = diff.evaluate_step(form, h)?;
            let room = e.error_bound + 1e-9 * scale * (1.0 + form.f.sup.min(1e6));
            Ok(e.value.abs() / room.max(f64::MIN_POSITIVE))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

pub fn evaluate(current: &WeightedCurrent, form: &TestForm, m: usize) -> Result<Evaluation> {
    let mut out = Evaluation {
        value: 0.0,
        error_bound: 0.0,
    };
    for (lambda, c) in &current.atoms {
        let e = evaluate_curve(c, form, m)?;
        out.value += lambda * e.value;
        out.error_bound += lambda.abs() * e.error_bound;
    }
    Ok(out)
}

pub fn mass_upper_bound(current: &WeightedCurrent) -> f64 {
    current.mass_upper_bound()
}

/// `max_φ |∂T(φ)|` over the battery, with `∂T(φ) = Σ λ_i (φ(end) − φ(start))`.
pub fn boundary_residual(current: &WeightedCurrent, battery: &[Lipschitz]) -> f64 {
    battery
        .iter()
        .map(|phi| {
            current
                .atoms
                .iter()
                .map(|(l, c)| {
                    if c.is_closed() {
                        0.0
                    } else {
                        l * (phi.eval(&c.end().0) - phi.eval(&c.start().0))
                    }
                })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Parameters of a cone-form battery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub centers: Vec<Point>,
    pub levels: Vec<f64>,
    pub slope: f64,
    pub truncation: f64,
}

/// Number of random pairs used to audit declared constants.
pub const AUDIT_PAIRS: usize = 10_000;

/// Scalar cone functions for every `(center, level)` plus the pointwise
/// maximum over each pair of consecutive centers.
pub fn cone_functions(space: &Space, centers: &[Point], levels: &[f64], slope: f64, trunc: f64) -> Result<Vec<Lipschitz>> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter("battery needs at least one center".into()));
    }
    if levels.is_empty() {
        return Err(Error::InvalidParameter("battery needs at least one level".into()));
    }
    let mut out = Vec::new();
    for e in centers {
        for &c in levels {
            out.push(Lipschitz::cone(space, std::slice::from_ref(e), &[c], slope, trunc)?);
        }
    }
    for w in centers.windows(2) {
        out.push(Lipschitz::cone(space, w, &[levels[0], levels[levels.len() - 1]], slope, trunc)?);
    }
    Ok(out)
}

/// Test forms built from cone functions: each cone paired with every
/// coordinate, and each cone paired with the next one.
pub fn cone_form_battery(space: &Space, centers: &[Point], levels: &[f64], slope: f64, trunc: f64) -> Result<Vec<TestForm>> {
    let cones = cone_functions(space, centers, levels, slope, trunc)?;
    let mut forms = Vec::new();
    for (i, g) in cones.iter().enumerate() {
        for k in 0..space.dim() {
            forms.push(TestForm::new(g.clone(), Lipschitz::coordinate(k)));
        }
        let next = &cones[(i + 1) % cones.len()];
        forms.push(TestForm::new(g.clone(), next.clone()));
    }
    // audit on the box spanned by the centers, padded by the cone support
    let d = space.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for c in centers {
        for k in 0..d {
            lo[k] = lo[k].min(c.0[k]);
            hi[k] = hi[k].max(c.0[k]);
        }
    }
    let pad = if slope > 0.0 { 2.0 * trunc / slope + 1.0 } else { 1.0 };
    for k in 0..d {
        lo[k] -= pad;
        hi[k] += pad;
    }
    // the audit is deterministic, so an identical battery passes once per process
    let key = audit_key(space, centers, levels, slope, trunc);
    if !audited().lock().is_ok_and(|set| set.contains(&key)) {
        for (i, g) in cones.iter().enumerate() {
            audit_fn(g, space, &lo, &hi, AUDIT_PAIRS, i as u64)?;
        }
        if let Ok(mut set) = audited().lock() {
            set.insert(key);
        }
    }
    Ok(forms)
}

fn audited() -> &'static Mutex<HashSet<Vec<u64>>> {
    static AUDITED: OnceLock<Mutex<HashSet<Vec<u64>>>> = OnceLock::new();
    AUDITED.get_or_init(Default::default)
}

fn audit_key(space: &Space, centers: &[Point], levels: &[f64], slope: f64, trunc: f64) -> Vec<u64> {
    let tag = match space {
        Space::Euclidean { dim } => *dim as u64,
        Space::Taxicab => u64::MAX,
    };
    let mut key = vec![tag, slope.to_bits(), trunc.to_bits(), centers.len() as u64];
    key.extend(levels.iter().map(|v| v.to_bits()));
    key.extend(centers.iter().flat_map(|c| c.0.iter().map(|v| v.to_bits())));
    key
}

impl BatterySpec {
    pub fn build(&self, space: &Space) -> Result<Vec<TestForm>> {
        cone_form_battery(space, &self.centers, &self.levels, self.slope, self.truncation)
    }

    /// A default battery spread over the box `[lo, hi]`.
    pub fn covering(space: &Space, lo: &[f64], hi: &[f64], per_axis: usize) -> Self {
        let d = space.dim();
        let diam = space.dist(lo, hi).max(1e-9);
        let mut centers = Vec::new();
        let total = per_axis.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let coords = (0..d)
                .map(|k| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    let frac = (i as f64 + 0.5) / per_axis as f64;
                    lo[k] + frac * (hi[k] - lo[k])
                })
                .collect();
            centers.push(Point(coords));
        }
        BatterySpec {
            centers,
            levels: vec![0.5 * diam, diam],
            slope: 1.0,
            truncation: diam,
        }
    }
}

/// Closes an open curve with the geodesic from its end back to its start.
pub fn close_with_geodesic(curve: &Curve) -> Result<Curve> {
    if curve.is_closed() {
        return Ok(curve.clone());
    }
    let (a, b) = (curve.start().clone(), curve.end().clone());
    if a == b || curve.length() == 0.0 {
        return curve.clone().close();
    }
    let g = Curve::from_vertices(curve.space().clone(), &[b, a], false)?;
    Curve::concatenate(&[curve.clone(), g])?.close()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[(f64, f64)], closed: bool) -> Curve {
        let v: Vec<Point> = pts.iter().map(|&(x, y)| Point::xy(x, y)).collect();
        Curve::from_vertices(Space::plane(), &v, closed).unwrap()
    }

    fn square() -> Curve {
        poly(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)], true)
    }

    #[test]
    fn telescoping_examples() {
        let seg = WeightedCurrent::single(poly(&[(0., 0.), (1., 0.)], false));
        let form = TestForm::new(Lipschitz::constant(1.0), Lipschitz::coordinate(0));
        assert_eq!(seg.evaluate(&form, 7).unwrap().value, 1.0);
        let sq = WeightedCurrent::single(square());
        assert_eq!(sq.evaluate(&form, 3).unwrap().value, 0.0);
    }

    #[test]
    fn square_area() {
        let sq = WeightedCurrent::single(square());
        let form = TestForm::new(Lipschitz::coordinate(0), Lipschitz::coordinate(1));
        // affine along edges, so the trapezoid sum is exact at any m
        let e = sq.evaluate(&form, 1).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reversal_cancels() {
        let s = square();
        let cur = WeightedCurrent::new(vec![(1.0, s.clone()), (1.0, s.reverse())]);
        let g = Lipschitz::cone(&Space::plane(), &[Point::xy(0.3, 0.2)], &[1.0], 2.0, 0.7).unwrap();
        let form = TestForm::new(g, Lipschitz::coordinate(1));
        assert!(cur.evaluate(&form, 64).unwrap().value.abs() < 1e-14);
    }

    #[test]
    fn mass_and_boundary() {
        let s = poly(&[(0., 0.), (1., 0.)], false);
        let cur = WeightedCurrent::new(vec![(1.0, s.clone()), (1.0, s.reverse())]);
        assert_eq!(cur.mass_upper_bound(), 2.0);
        assert_eq!(WeightedCurrent::default().mass_upper_bound(), 0.0);
        let single = WeightedCurrent::single(s);
        assert_eq!(boundary_residual(&single, &[Lipschitz::coordinate(0)]), 1.0);
        assert_eq!(boundary_residual(&WeightedCurrent::single(square()), &[Lipschitz::coordinate(0)]), 0.0);
    }

    #[test]
    fn cones() {
        let sp = Space::plane();
        let c = Lipschitz::cone(&sp, &[Point::xy(0., 0.)], &[100.0], 1.0, 1e9).unwrap();
        assert_eq!(c.eval(&[3.0, 4.0]), 95.0);
        let z = Lipschitz::cone(&sp, &[Point::xy(0., 0.)], &[1.0], 1.0, 0.0).unwrap();
        assert_eq!(z.eval(&[0.1, 0.0]), 0.0);
        let b = cone_form_battery(&sp, &[Point::xy(0., 0.), Point::xy(5., 5.)], &[1.0, 2.0], 1.5, 1.0).unwrap();
        assert_eq!(b.len(), 5 * 3);
    }

    #[test]
    fn closing() {
        let l = close_with_geodesic(&poly(&[(0., 0.), (1., 0.), (1., 1.)], false)).unwrap();
        assert!(l.is_closed());
        assert!((l.length() - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        let d = close_with_geodesic(&poly(&[(0., 0.), (1., 0.)], false)).unwrap();
        assert!((d.length() - 2.0).abs() < 1e-12);
    }
}
