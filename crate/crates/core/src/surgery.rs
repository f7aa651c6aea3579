//! The surgery algorithm: repeated Type II cuts until the curve has few
//! short pieces per window, then a Type I cut unless it is already
//! large-scale invertible.

use serde::{Deserialize, Serialize};

use crate::current::{discrepancy_ratio, BatterySpec, WeightedCurrent};
use crate::cuts::{certify_morrey, try_type1, type2_cut, CutRecord, CutType, MorreyBracket};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::regularity::is_den_curve;

/// `c` in `ε = c·η`, as `1/ETA_DENOM`.
pub const ETA_DENOM: f64 = 15.0;

/// Morrey constant for the η-parametrized surgery: pieces satisfy
/// `Morrey ≤ C′/η²`.
pub const C_PRIME: f64 = 524.0;

/// Partition count used for the identity check on the test battery.
pub const IDENTITY_PARTITION: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryParams {
    pub epsilon: f64,
    pub n: usize,
    /// Defaults to the shortest piece of the coarsest resolution.
    pub delta: Option<f64>,
}

impl SurgeryParams {
    pub fn new(epsilon: f64, n: usize) -> Self {
        SurgeryParams {
            epsilon,
            n,
            delta: None,
        }
    }

    /// `ε = η/15`, `n = ⌈ε⁻²⌉`.
    pub fn from_eta(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta must lie in (0, 1), got {eta}")));
        }
        let epsilon = eta / ETA_DENOM;
        Ok(SurgeryParams::new(epsilon, eta_n(eta)))
    }
}

/// `n = ⌈(15/η)²⌉`.
pub fn eta_n(eta: f64) -> usize {
    let inv = ETA_DENOM / eta;
    (inv * inv).ceil() as usize
}

/// Total-length inflation factor `1 + 2ε/(1−ε) + 12/(ε·n·(1−ε))`.
pub fn length_factor(eps: f64, n: usize) -> f64 {
    1.0 + 2.0 * eps / (1.0 - eps) + 12.0 / (eps * n as f64 * (1.0 - eps))
}

/// Per-piece Morrey bound `4/ε + 2n + 10`.
pub fn piece_morrey_bound(eps: f64, n: usize) -> f64 {
    4.0 / eps + 2.0 * n as f64 + 10.0
}

/// One evaluated inequality `value ≤ limit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub ok: bool,
}

impl BoundCheck {
    pub fn le(name: impl Into<String>, value: f64, limit: f64) -> Self {
        BoundCheck {
            name: name.into(),
            value,
            limit,
            ok: value <= limit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryCertificate {
    pub epsilon: f64,
    pub n: usize,
    pub delta: f64,
    pub eta: Option<f64>,
    pub steps: Vec<CutRecord>,
    pub type1: usize,
    pub type2: usize,
    pub input_length: f64,
    pub initial_small: usize,
    pub output_lengths: Vec<f64>,
    pub morrey: Vec<MorreyBracket>,
    pub bound_checks: Vec<BoundCheck>,
}

impl SurgeryCertificate {
    pub fn all_ok(&self) -> bool {
        self.bound_checks.iter().all(|c| c.ok)
    }

    /// `N = T_I + T_II + 1`.
    pub fn step_count(&self) -> usize {
        self.type1 + self.type2 + 1
    }
}

#[derive(Clone, Debug)]
pub struct SurgeryResult {
    pub pieces: Vec<Curve>,
    pub certificate: SurgeryCertificate,
}

fn check_input(curve: &Curve, params: &SurgeryParams) -> Result<f64> {
    if !curve.is_closed() {
        return Err(Error::NotClosed);
    }
    if curve.length() == 0.0 {
        return Err(Error::ZeroLength);
    }
    let eps = params.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if params.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let min_piece = curve.min_piece_length();
    match params.delta {
        None => Ok(min_piece),
        Some(d) if d > 0.0 && d <= min_piece => Ok(d),
        Some(d) => Err(Error::InvalidParameter(format!(
            "delta must lie in (0, {min_piece}], got {d}"
        ))),
    }
}

/// Runs the surgery algorithm and certifies every advertised bound.
pub fn surgery(curve: &Curve, params: SurgeryParams) -> Result<SurgeryResult> {
    let delta = check_input(curve, &params)?;
    let (eps, n) = (params.epsilon, params.n);
    let l = curve.length();
    let initial_small = curve.small_edge_count(delta);
    // twice the counts guaranteed by the length and small-edge ledgers
    let t1_bound = l / ((1.0 - eps) * delta);
    let budget1 = (2.0 * t1_bound).ceil() as usize + 2;
    let budget2 = (2.0 * (3.0 * t1_bound + initial_small as f64) / n as f64).ceil() as usize + 2;

    let mut pieces = Vec::new();
    let mut steps = Vec::new();
    let mut morrey = Vec::new();
    let (mut t1, mut t2) = (0usize, 0usize);
    let mut gamma = curve.clone();
    let mut monotone = true;
    let final_limit = piece_morrey_bound(eps, n);
    loop {
        while gamma.length() > 0.0 && !is_den_curve(&gamma, delta, eps, n)?.holds {
            let out = type2_cut(&gamma, delta, eps, n)?;
            t2 += 1;
            if t2 > budget2 {
                return Err(Error::StepBudget(format!("more than {budget2} Type II cuts")));
            }
            monotone &= out.remainder.length() <= gamma.length() * (1.0 + 1e-12);
            morrey.push(out.record.excised_morrey.expect("verified cut"));
            steps.push(out.record);
            pieces.push(out.excised);
            gamma = out.remainder;
        }
        if gamma.length() == 0.0 {
            break;
        }
        match try_type1(&gamma, delta, eps, n)? {
            None => {
                let m = certify_morrey(&gamma, final_limit).ok_or(Error::CutVerification {
                    bound: "final piece Morrey norm",
                    value: f64::NAN,
                    limit: final_limit,
                })?;
                morrey.push(m);
                pieces.push(gamma);
                break;
            }
            Some(out) => {
                t1 += 1;
                if t1 > budget1 {
                    return Err(Error::StepBudget(format!("more than {budget1} Type I cuts")));
                }
                monotone &= out.remainder.length() <= gamma.length() * (1.0 + 1e-12);
                morrey.push(out.record.excised_morrey.expect("verified cut"));
                steps.push(out.record);
                pieces.push(out.excised);
                gamma = out.remainder;
            }
        }
    }

    let output_lengths: Vec<f64> = pieces.iter().map(|p| p.length()).collect();
    let total: f64 = output_lengths.iter().sum();
    let mut checks = vec![
        BoundCheck::le("total length", total, length_factor(eps, n) * l * (1.0 + 1e-12)),
        BoundCheck::le("Type I count", t1 as f64, t1_bound * (1.0 + 1e-12)),
        BoundCheck::le(
            "Type II count",
            (n * t2) as f64,
            (3 * t1 + initial_small) as f64,
        ),
        BoundCheck::le("monotone lengths", if monotone { 0.0 } else { 1.0 }, 0.0),
    ];
    let worst = morrey.iter().map(|m| m.hi).fold(0.0, f64::max);
    checks.push(BoundCheck::le("piece Morrey norm", worst, final_limit));
    checks.push(identity_check(curve, &pieces)?);
    let certificate = SurgeryCertificate {
        epsilon: eps,
        n,
        delta,
        eta: None,
        steps,
        type1: t1,
        type2: t2,
        input_length: l,
        initial_small,
        output_lengths,
        morrey,
        bound_checks: checks,
    };
    debug_assert!(certificate.step_count() >= pieces.len());
    Ok(SurgeryResult {
        pieces,
        certificate,
    })
}

/// Largest ratio of `|[[γ]] − Σ [[γ_j]]|` to its quadrature error bound
/// over a cone battery.
pub fn identity_check(curve: &Curve, pieces: &[Curve]) -> Result<BoundCheck> {
    let (lo, hi) = curve.bbox();
    let battery = BatterySpec::covering(curve.space(), &lo, &hi, 3).build(curve.space())?;
    let whole = WeightedCurrent::single(curve.clone());
    let parts = WeightedCurrent::new(pieces.iter().map(|p| (1.0, p.clone())).collect());
    let worst = discrepancy_ratio(&whole.minus(&parts), &battery, IDENTITY_PARTITION)?;
    Ok(BoundCheck::le("current identity (discrepancy / quadrature bound)", worst, 1.0))
}

/// Surgery with `ε = η/15`, `n = ⌈ε⁻²⌉`, additionally certifying
/// `Σ length ≤ (1 + η)·length` and `Morrey ≤ C′/η²` per piece.
pub fn surgery_eta(curve: &Curve, eta: f64) -> Result<SurgeryResult> {
    let params = SurgeryParams::from_eta(eta)?;
    let mut res = surgery(curve, params)?;
    let cert = &mut res.certificate;
    let total: f64 = cert.output_lengths.iter().sum();
    cert.eta = Some(eta);
    cert.bound_checks.push(BoundCheck::le(
        "eta total length",
        total,
        (1.0 + eta) * cert.input_length * (1.0 + 1e-12),
    ));
    let worst = cert.morrey.iter().map(|m| m.hi).fold(0.0, f64::max);
    cert.bound_checks
        .push(BoundCheck::le("eta piece Morrey norm", worst, C_PRIME / (eta * eta)));
    Ok(res)
}

/// Counts cuts of each type in a certificate's log.
pub fn count_cuts(steps: &[CutRecord]) -> (usize, usize) {
    let t1 = steps.iter().filter(|s| s.cut_type == CutType::TypeI).count();
    let t2 = steps.iter().filter(|s| s.cut_type == CutType::TypeII).count();
    (t1, t2)
}
