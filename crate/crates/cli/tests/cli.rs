use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curve_surgery::io::{AtomsJson, SurgeryJson};
use curve_surgery::Curve;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curve-surgery"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_square(dir: &TempDir) -> PathBuf {
    let path = p(dir, "square.json");
    fs::write(
        &path,
        r#"{"space": {"type": "euclidean", "dim": 2}, "closed": true,
            "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}"#,
    )
    .unwrap();
    path
}

#[test]
fn surgery_then_verify() {
    let dir = TempDir::new().unwrap();
    let sq = write_square(&dir);
    let out = p(&dir, "r.json");
    let svg = p(&dir, "r.svg");
    let o = run(&["surgery", "--eta", "0.5", "--in", s(&sq), "--out", s(&out), "--svg", s(&svg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read_to_string(&svg).unwrap().contains("<path"));
    let o = run(&["verify", "--in", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn tampered_length_is_named() {
    let dir = TempDir::new().unwrap();
    let sq = write_square(&dir);
    let out = p(&dir, "r.json");
    assert_eq!(code(&run(&["surgery", "--epsilon", "0.6", "--n", "4", "--in", s(&sq), "--out", s(&out)])), 0);
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    v["certificate"]["output_lengths"][0] = serde_json::json!(1.0);
    fs::write(&out, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = run(&["verify", "--in", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("output_lengths"), "{}", stderr(&o));
}

#[test]
fn morrey_of_segment_contains_two() {
    let dir = TempDir::new().unwrap();
    let seg = p(&dir, "seg.json");
    fs::write(
        &seg,
        r#"{"space": {"type": "euclidean", "dim": 2}, "closed": false, "vertices": [[0, 0], [3, 4]]}"#,
    )
    .unwrap();
    let o = run(&["morrey", "--in", s(&seg), "--tol", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let (lo, hi) = (v["lo"].as_f64().unwrap(), v["hi"].as_f64().unwrap());
    assert!(lo <= 2.0 && 2.0 <= hi && hi - lo <= 1e-6, "[{lo}, {hi}]");
}

#[test]
fn decompose_then_verify() {
    let dir = TempDir::new().unwrap();
    let flow = p(&dir, "flow.json");
    let atoms = p(&dir, "atoms.json");
    assert_eq!(
        code(&run(&["sample", "--fixture", "grid-flow", "--vertices", "4", "--seed", "3", "--out", s(&flow)])),
        0
    );
    let o = run(&["decompose", "--epsilon", "0.5", "--in", s(&flow), "--out", s(&atoms)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin()
        .env("CURVE_SURGERY_THREADS", "1")
        .args(["verify", "--in", s(&atoms)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn saved_artifacts_round_trip_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let walk = p(&dir, "walk.json");
    let out = p(&dir, "r.json");
    let flow = p(&dir, "flow.json");
    let atoms = p(&dir, "atoms.json");
    run(&["sample", "--fixture", "walk", "--vertices", "30", "--seed", "9", "--out", s(&walk)]);
    assert_eq!(code(&run(&["surgery", "--epsilon", "0.3", "--n", "4", "--in", s(&walk), "--out", s(&out)])), 0);
    run(&["sample", "--fixture", "grid-flow", "--vertices", "4", "--seed", "1", "--out", s(&flow)]);
    run(&["decompose", "--epsilon", "0.5", "--in", s(&flow), "--out", s(&atoms)]);

    let text = fs::read_to_string(&walk).unwrap();
    let c: Curve = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&c).unwrap() + "\n", text);
    let text = fs::read_to_string(&out).unwrap();
    let r: SurgeryJson = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
    let text = fs::read_to_string(&atoms).unwrap();
    let a: AtomsJson = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&a).unwrap() + "\n", text);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let walk = p(&dir, "walk.json");
    run(&["sample", "--fixture", "walk", "--vertices", "25", "--seed", "4", "--out", s(&walk)]);
    let (a, b) = (p(&dir, "a.json"), p(&dir, "b.json"));
    run(&["surgery", "--eta", "0.5", "--in", s(&walk), "--out", s(&a)]);
    run(&["surgery", "--eta", "0.5", "--in", s(&walk), "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sampling_and_eval() {
    let dir = TempDir::new().unwrap();
    let seg = p(&dir, "seg.json");
    let sampled = p(&dir, "sampled.json");
    run(&["sample", "--fixture", "segment", "--seed", "2", "--out", s(&seg)]);
    let o = run(&["sample", "--in", s(&seg), "--delta", "0.05", "--out", s(&sampled)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c: Curve = serde_json::from_str(&fs::read_to_string(&sampled).unwrap()).unwrap();
    assert!(!c.is_closed());
    let o = run(&["eval", "--in", s(&sampled), "--m", "64"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rows.len() >= 50);
}

#[test]
fn usage_and_parse_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let sq = write_square(&dir);
    let out = p(&dir, "r.json");
    // neither --eta nor --epsilon/--n
    assert_eq!(code(&run(&["surgery", "--in", s(&sq), "--out", s(&out)])), 1);
    // both parametrizations
    assert_eq!(
        code(&run(&["surgery", "--eta", "0.5", "--epsilon", "0.1", "--n", "4", "--in", s(&sq), "--out", s(&out)])),
        1
    );
    assert_eq!(code(&run(&["morrey", "--in", s(&sq), "--tol", "0"])), 1);
    let bad = p(&dir, "bad.json");
    fs::write(&bad, r#"{"space": {"type": "euclidean", "dim": 2}, "closed": "yes", "vertices": []}"#).unwrap();
    let o = run(&["morrey", "--in", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("closed"), "{}", stderr(&o));
    assert_eq!(code(&run(&["verify", "--in", s(&p(&dir, "missing.json"))])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn nested_schema_errors_name_the_path() {
    let dir = TempDir::new().unwrap();
    let sq = write_square(&dir);
    let out = p(&dir, "r.json");
    assert_eq!(code(&run(&["surgery", "--in", s(&sq), "--out", s(&out), "--epsilon", "0.6", "--n", "4"])), 0);
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    v["certificate"]["morrey"][0]["hi"] = "large".into();
    fs::write(&out, v.to_string()).unwrap();
    let o = run(&["verify", "--in", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("certificate.morrey[0].hi"), "{}", stderr(&o));
}
