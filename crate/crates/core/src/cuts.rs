//! The basic cut and the two cut operations built on it.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::morrey::{certify_upper, morrey_upper_bound_edges};
use crate::regularity::{is_den_curve, minimal_violating_interval_with, TAU_REL};
use crate::space::Point;

/// Slack for re-checking length inequalities after floating-point assembly.
const LENGTH_SLACK_REL: f64 = 1e-10;

/// Retries of the violating-interval search with a tighter slack.
const TYPE1_RETRIES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutType {
    Basic,
    TypeI,
    TypeII,
}

/// Certified bracket for the Morrey norm of an excised loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorreyBracket {
    pub lo: f64,
    pub hi: f64,
}

/// What a cut did, without the curves themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub cut_type: CutType,
    pub t: f64,
    pub t2: f64,
    pub beta: Option<f64>,
    pub input_length: f64,
    pub remainder_length: f64,
    pub excised_length: f64,
    pub chord: f64,
    pub small_before: usize,
    pub small_after: usize,
    pub excised_morrey: Option<MorreyBracket>,
    /// The slack used by the interval search (Type I only).
    pub tau: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CutOutcome {
    pub remainder: Curve,
    pub excised: Curve,
    pub record: CutRecord,
}

fn closed_via(curve: &Curve, arc: Curve, from: &Point, to: &Point) -> Result<Curve> {
    let space = curve.space().clone();
    if from == to {
        return arc.close();
    }
    let g = Curve::from_vertices(space, &[from.clone(), to.clone()], false)?;
    Curve::concatenate(&[arc, g])?.close()
}

/// Splits a closed curve at `t, t'` into
/// `γ|[t',t] ++ G(γ(t), γ(t'))` and `γ|[t,t'] ++ G(γ(t'), γ(t))`.
pub fn basic_cut(curve: &Curve, t: f64, t2: f64) -> Result<CutOutcome> {
    if !curve.is_closed() {
        return Err(Error::NotClosed);
    }
    let (a, b) = (curve.canonical(t), curve.canonical(t2));
    if a == b {
        return Err(Error::EmptyInterval(a));
    }
    let (p, q) = (curve.point_at(a), curve.point_at(b));
    let chord = curve.space().dist(&p.0, &q.0);
    let remainder = closed_via(curve, curve.restrict(b, a)?, &p, &q)?;
    let excised = closed_via(curve, curve.restrict(a, b)?, &q, &p)?;
    let record = CutRecord {
        cut_type: CutType::Basic,
        t: a,
        t2: b,
        beta: None,
        input_length: curve.length(),
        remainder_length: remainder.length(),
        excised_length: excised.length(),
        chord,
        small_before: 0,
        small_after: 0,
        excised_morrey: None,
        tau: None,
    };
    Ok(CutOutcome {
        remainder,
        excised,
        record,
    })
}

/// Bracket showing `Morrey(g) ≤ limit`, or `None` if it cannot be certified.
pub(crate) fn certify_morrey(g: &Curve, limit: f64) -> Option<MorreyBracket> {
    let edges = morrey_upper_bound_edges(g);
    if edges <= limit {
        // every closed loop of positive length has Morrey norm at least 2
        let lo = if g.length() > 0.0 { 2.0 } else { 0.0 };
        return Some(MorreyBracket { lo, hi: edges });
    }
    let est = certify_upper(g, limit);
    (est.hi <= limit).then_some(MorreyBracket {
        lo: est.lo,
        hi: est.hi,
    })
}

fn require(ok: bool, bound: &'static str, value: f64, limit: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::CutVerification { bound, value, limit })
    }
}

/// Cuts off a minimal violating interval of a `(δ, ε, n)`-curve that is not
/// `(δ, ε)`-l.s.i., re-verifying every guaranteed inequality.
pub fn type1_cut(curve: &Curve, delta: f64, eps: f64, n: usize) -> Result<CutOutcome> {
    if !is_den_curve(curve, delta, eps, n)?.holds {
        return Err(Error::Precondition("Type I cut needs a (δ, ε, n)-curve".into()));
    }
    try_type1(curve, delta, eps, n)?
        .ok_or_else(|| Error::Precondition("curve is large-scale invertible".into()))
}

/// The Type I cut, or `None` when no interval violates by more than the
/// default slack.
pub(crate) fn try_type1(curve: &Curve, delta: f64, eps: f64, n: usize) -> Result<Option<CutOutcome>> {
    if !curve.is_closed() {
        return Err(Error::NotClosed);
    }
    let l = curve.length();
    let slack = LENGTH_SLACK_REL * l;
    let limit = 4.0 / eps + 2.0 * n as f64 + 10.0;
    let mut tau = TAU_REL * l;
    let mut small_before = None;
    for attempt in 0..=TYPE1_RETRIES {
        let Some(iv) = minimal_violating_interval_with(curve, delta, eps, tau)? else {
            if attempt == 0 {
                return Ok(None);
            }
            break;
        };
        let small_before = *small_before.get_or_insert_with(|| curve.small_edge_count(delta));
        let mut out = basic_cut(curve, iv.t, iv.t2)?;
        let beta = iv.beta;
        let rl = out.remainder.length();
        let el = out.excised.length();
        let small_after = out.remainder.small_edge_count(delta);
        require(beta >= delta && beta <= 0.5 * l + slack, "beta range", beta, 0.5 * l)?;
        require(rl <= l - (1.0 - eps) * beta + slack, "remainder length", rl, l - (1.0 - eps) * beta)?;
        require(rl + el <= l + 2.0 * eps * beta + slack, "total length", rl + el, l + 2.0 * eps * beta)?;
        require(
            small_after <= small_before + 3,
            "small edge count",
            small_after as f64,
            (small_before + 3) as f64,
        )?;
        if let Some(m) = certify_morrey(&out.excised, limit) {
            out.record.cut_type = CutType::TypeI;
            out.record.beta = Some(beta);
            out.record.small_before = small_before;
            out.record.small_after = small_after;
            out.record.excised_morrey = Some(m);
            out.record.tau = Some(tau);
            return Ok(Some(out));
        }
        tau *= 0.1;
    }
    Err(Error::CutVerification {
        bound: "excised Morrey norm",
        value: f64::NAN,
        limit,
    })
}

/// Cuts off a window holding exactly `n + 1` short pieces from a curve that
/// is not a `(δ, ε, n)`-curve.
pub fn type2_cut(curve: &Curve, delta: f64, eps: f64, n: usize) -> Result<CutOutcome> {
    if !curve.is_closed() {
        return Err(Error::NotClosed);
    }
    let verdict = is_den_curve(curve, delta, eps, n)?;
    let w = verdict
        .window
        .ok_or_else(|| Error::Precondition("curve is already a (δ, ε, n)-curve".into()))?;
    let l = curve.length();
    let slack = LENGTH_SLACK_REL * l;
    let small_before = curve.small_edge_count(delta);
    let mut out = if w.length >= l {
        // the window is the whole loop: everything is excised
        let p = curve.point_at(w.t);
        CutOutcome {
            remainder: Curve::point(curve.space().clone(), p, true)?,
            excised: curve.rotate(w.t)?,
            record: CutRecord {
                cut_type: CutType::Basic,
                t: w.t,
                t2: w.t2,
                beta: None,
                input_length: l,
                remainder_length: 0.0,
                excised_length: l,
                chord: 0.0,
                small_before: 0,
                small_after: 0,
                excised_morrey: None,
                tau: None,
            },
        }
    } else {
        basic_cut(curve, w.t, w.t2)?
    };
    let rl = out.remainder.length();
    let el = out.excised.length();
    let small_after = out.remainder.small_edge_count(delta);
    let limit = 2.0 * (n as f64 + 2.0 / eps + 2.0);
    require(rl <= l + slack, "remainder length", rl, l)?;
    require(rl + el <= l + 4.0 * delta / eps + slack, "total length", rl + el, l + 4.0 * delta / eps)?;
    require(
        small_after + n <= small_before,
        "small edge count",
        small_after as f64,
        small_before as f64 - n as f64,
    )?;
    let m = certify_morrey(&out.excised, limit).ok_or(Error::CutVerification {
        bound: "excised Morrey norm",
        value: morrey_upper_bound_edges(&out.excised),
        limit,
    })?;
    out.record.cut_type = CutType::TypeII;
    out.record.small_before = small_before;
    out.record.small_after = small_after;
    out.record.excised_morrey = Some(m);
    Ok(out)
}
