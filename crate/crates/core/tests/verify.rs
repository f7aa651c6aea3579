use curve_surgery::decompose::decompose_flow;
use curve_surgery::fixtures::{grid_flow, unit_square};
use curve_surgery::io::{from_json, to_json, AtomsJson, SurgeryJson};
use curve_surgery::verify::{verify_decomposition, verify_surgery};
use curve_surgery::{surgery, surgery_eta, SurgeryParams};
use serde_json::Value;

/// Every numeric leaf under `root`, as a JSON pointer.
fn numeric_leaves(v: &Value, path: String, out: &mut Vec<String>) {
    match v {
        Value::Number(_) => out.push(path),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| numeric_leaves(x, format!("{path}/{i}"), out)),
        Value::Object(o) => o
            .iter()
            .for_each(|(k, x)| numeric_leaves(x, format!("{path}/{k}"), out)),
        _ => {}
    }
}

fn nudge(n: &Value) -> Value {
    if let Some(u) = n.as_u64() {
        return Value::from(u + 1);
    }
    let f = n.as_f64().unwrap();
    Value::from(f + (f.abs() * 1e-6).max(1e-9))
}

fn square_doc() -> SurgeryJson {
    let c = unit_square();
    let r = surgery(&c, SurgeryParams::new(0.6, 4)).unwrap();
    SurgeryJson::new(&c, &r)
}

#[test]
fn untouched_surgery_result_verifies() {
    let doc = square_doc();
    assert!(doc.certificate.all_ok());
    let v = verify_surgery(&doc);
    assert!(v.ok(), "{:?}", v.failures().collect::<Vec<_>>());
}

#[test]
fn reloaded_surgery_result_verifies() {
    let doc = square_doc();
    let back: SurgeryJson = from_json(&to_json(&doc).unwrap()).unwrap();
    assert!(verify_surgery(&back).ok());
}

#[test]
fn every_certificate_number_is_tamper_evident() {
    let doc = square_doc();
    let base = serde_json::to_value(&doc).unwrap();
    let mut leaves = Vec::new();
    numeric_leaves(&base["certificate"], "/certificate".into(), &mut leaves);
    assert!(leaves.len() > 20);
    for ptr in leaves {
        let mut v = base.clone();
        let leaf = v.pointer_mut(&ptr).unwrap();
        *leaf = nudge(leaf);
        let tampered: SurgeryJson = match serde_json::from_value(v) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let report = verify_surgery(&tampered);
        let failed: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
        assert!(!failed.is_empty(), "edit at {ptr} went unnoticed");
        assert!(failed.iter().all(|n| !n.is_empty()));
    }
}

#[test]
fn tampered_piece_fails() {
    let mut v = serde_json::to_value(square_doc()).unwrap();
    let x = v.pointer_mut("/pieces/0/vertices/1/0").unwrap();
    *x = nudge(x);
    let doc: SurgeryJson = serde_json::from_value(v).unwrap();
    assert!(!verify_surgery(&doc).ok());
}

#[test]
fn eta_result_verifies() {
    let c = unit_square();
    let r = surgery_eta(&c, 0.5).unwrap();
    let doc = SurgeryJson::new(&c, &r);
    let v = verify_surgery(&doc);
    assert!(v.ok(), "{:?}", v.failures().collect::<Vec<_>>());
    assert!(v.checks.iter().any(|c| c.name == "eta total length"));
}

#[test]
fn decomposition_verifies_and_detects_edits() {
    let flow = grid_flow(4, 3, 11);
    let d = decompose_flow(&flow, 0.5).unwrap();
    assert!(d.all_ok());
    let doc = AtomsJson {
        input: flow,
        decomposition: d,
    };
    let v = verify_decomposition(&doc);
    assert!(v.ok(), "{:?}", v.failures().collect::<Vec<_>>());

    let mut j = serde_json::to_value(&doc).unwrap();
    let lam = j.pointer_mut("/atoms/0/lambda").unwrap();
    *lam = nudge(lam);
    let bad: AtomsJson = serde_json::from_value(j).unwrap();
    let names: Vec<_> = verify_decomposition(&bad).failures().map(|c| c.name.clone()).collect();
    assert!(names.iter().any(|n| n.contains("lambda")), "{names:?}");
}
