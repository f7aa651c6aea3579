//! Independent re-verification of stored results.
//!
//! Every bound is recomputed from the raw curves. The stored certificate is
//! then compared field by field against a deterministic replay, so editing
//! any recorded number is reported under the name of that field.

use serde::Serialize;
use serde_json::Value;

use crate::cuts::certify_morrey;
use crate::current::{boundary_residual, Lipschitz};
use crate::decompose::{decompose_flow, reproduction_check, C_ATOM};
use crate::io::{AtomsJson, SurgeryJson};
use crate::surgery::{
    count_cuts, identity_check, length_factor, piece_morrey_bound, surgery, surgery_eta, BoundCheck,
    SurgeryParams, C_PRIME,
};

/// Outcome of a verification: every re-derived inequality.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Verification {
    pub checks: Vec<BoundCheck>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }

    fn push(&mut self, c: BoundCheck) {
        self.checks.push(c);
    }

    fn fail(&mut self, name: impl Into<String>) {
        self.checks.push(BoundCheck::le(name, 1.0, 0.0));
    }
}

/// Paths at which two JSON trees differ.
fn diff_paths(a: &Value, b: &Value, path: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, va) in x {
                match y.get(k) {
                    Some(vb) => diff_paths(va, vb, &format!("{path}.{k}"), out),
                    None => out.push(format!("{path}.{k}")),
                }
            }
            for k in y.keys().filter(|k| !x.contains_key(*k)) {
                out.push(format!("{path}.{k}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path} (length {} vs {})", x.len(), y.len()));
            }
            for (i, (va, vb)) in x.iter().zip(y).enumerate() {
                diff_paths(va, vb, &format!("{path}[{i}]"), out);
            }
        }
        _ if a != b => out.push(path.to_string()),
        _ => {}
    }
}

fn compare_replay<T: Serialize>(stored: &T, replayed: &T, root: &str, v: &mut Verification) {
    let (a, b) = match (serde_json::to_value(stored), serde_json::to_value(replayed)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return v.fail(format!("{root} serializable")),
    };
    let mut paths = Vec::new();
    diff_paths(&a, &b, root, &mut paths);
    if paths.is_empty() {
        v.push(BoundCheck::le(format!("{root} matches replay"), 0.0, 0.0));
    }
    for p in paths {
        v.fail(format!("recorded {p} matches replay"));
    }
}

/// Re-derives every surgery bound from the input and pieces, then checks
/// the stored certificate against a replay.
pub fn verify_surgery(doc: &SurgeryJson) -> Verification {
    let mut v = Verification::default();
    let cert = &doc.certificate;
    let (eps, n, delta) = (cert.epsilon, cert.n, cert.delta);
    let l = doc.input.length();
    let lengths: Vec<f64> = doc.pieces.iter().map(|p| p.length()).collect();
    let total: f64 = lengths.iter().sum();
    let (t1, t2) = count_cuts(&cert.steps);

    let open = doc.pieces.iter().filter(|p| !p.is_closed()).count();
    v.push(BoundCheck::le("open pieces", open as f64, 0.0));
    v.push(BoundCheck::le(
        "piece count vs cut count",
        doc.pieces.len() as f64,
        (t1 + t2 + 1) as f64,
    ));
    if eps > 0.0 && eps < 1.0 && n > 0 && delta > 0.0 {
        v.push(BoundCheck::le("total length", total, length_factor(eps, n) * l * (1.0 + 1e-12)));
        let t1_bound = l / ((1.0 - eps) * delta);
        v.push(BoundCheck::le("Type I count", t1 as f64, t1_bound * (1.0 + 1e-12)));
        let small = doc.input.small_edge_count(delta);
        v.push(BoundCheck::le("Type II count", (n * t2) as f64, (3 * t1 + small) as f64));
        let limit = piece_morrey_bound(eps, n);
        let mut worst = 0.0f64;
        for p in &doc.pieces {
            worst = worst.max(certify_morrey(p, limit).map_or(f64::INFINITY, |m| m.hi));
        }
        v.push(BoundCheck::le("piece Morrey norm", worst, limit));
        if let Some(eta) = cert.eta {
            v.push(BoundCheck::le("eta total length", total, (1.0 + eta) * l * (1.0 + 1e-12)));
            v.push(BoundCheck::le("eta piece Morrey norm", worst, C_PRIME / (eta * eta)));
        }
    } else {
        v.fail("parameter range");
    }
    match identity_check(&doc.input, &doc.pieces) {
        Ok(c) => v.push(c),
        Err(e) => v.fail(format!("current identity ({e})")),
    }

    let replay = match cert.eta {
        Some(eta) => surgery_eta(&doc.input, eta),
        None => surgery(
            &doc.input,
            SurgeryParams {
                epsilon: eps,
                n,
                delta: Some(delta),
            },
        ),
    };
    match replay {
        Ok(r) => {
            compare_replay(&doc.pieces, &r.pieces, "pieces", &mut v);
            compare_replay(cert, &r.certificate, "certificate", &mut v);
        }
        Err(e) => v.fail(format!("replay ({e})")),
    }
    v
}

/// Re-derives the decomposition bounds from the flow and the atoms, then
/// checks the stored certificates against a replay.
pub fn verify_decomposition(doc: &AtomsJson) -> Verification {
    let mut v = Verification::default();
    let eps = doc.decomposition.epsilon;
    let flow = &doc.input;
    if let Err(e) = flow.validate() {
        v.fail(format!("input flow ({e})"));
        return v;
    }
    let atoms = &doc.decomposition.atoms;
    let mass = flow.mass_upper_bound();
    let lambda_sum: f64 = atoms.iter().map(|a| a.lambda).sum();
    let negative = atoms.iter().filter(|a| !(a.lambda >= 0.0)).count();
    v.push(BoundCheck::le("negative weights", negative as f64, 0.0));
    let open = atoms.iter().filter(|a| !a.curve.is_closed()).count();
    v.push(BoundCheck::le("open atoms", open as f64, 0.0));
    if eps > 0.0 && eps < 1.0 {
        v.push(BoundCheck::le("lambda sum vs flow mass", lambda_sum, (1.0 + eps) * mass * (1.0 + 1e-12)));
        let limit = C_ATOM / (eps * eps);
        let worst = atoms
            .iter()
            .map(|a| certify_morrey(&a.curve, limit).map_or(f64::INFINITY, |m| m.hi))
            .fold(0.0, f64::max);
        v.push(BoundCheck::le("atom Morrey norm", worst, limit));
    } else {
        v.fail("parameter range");
    }
    let output = doc.decomposition.as_current();
    let coords: Vec<Lipschitz> = (0..flow.space.dim()).map(Lipschitz::coordinate).collect();
    v.push(BoundCheck::le("atom boundary residual", boundary_residual(&output, &coords).abs(), 0.0));
    match flow.as_current() {
        Ok(input) => match reproduction_check(&input, &output) {
            Ok(c) => v.push(c),
            Err(e) => v.fail(format!("current reproduction ({e})")),
        },
        Err(e) => v.fail(format!("input flow ({e})")),
    }
    match decompose_flow(flow, eps) {
        Ok(r) => compare_replay(&doc.decomposition, &r, "decomposition", &mut v),
        Err(e) => v.fail(format!("replay ({e})")),
    }
    v
}
