use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_tensorrank");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut all = vec!["generate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path_str(&out)]);
    let o = run(&all);
    assert!(o.status.success(), "{all:?}: {}", String::from_utf8_lossy(&o.stderr));
    out
}

fn write_f64(dir: &TempDir, name: &str, shape: &[usize], data: &[f64]) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, json!({"shape": shape, "scalar": "f64", "data": data}).to_string()).unwrap();
    p
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn rational_strings(v: &Value) -> Vec<String> {
    v["data"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

const CLASSES: [&str; 8] = ["D0", "D1", "D2", "D2'", "D2''", "G2", "D3", "G3"];

#[test]
fn canonical_round_trip() {
    let dir = TempDir::new().unwrap();
    for (i, class) in CLASSES.iter().enumerate() {
        let p = generate(&dir, &format!("c{i}.json"), &[&format!("canonical:{class}")]);
        let rep = ok_json(&["classify", path_str(&p)]);
        assert_eq!(rep["class"], *class);
    }
    let g3 = ok_json(&["classify", path_str(&dir.path().join("c7.json"))]);
    assert_eq!(g3["border_rank"], 3);
    assert_eq!(g3["delta"], "-4/1");
}

#[test]
fn random_orbit_round_trip() {
    let dir = TempDir::new().unwrap();
    for class in CLASSES {
        for seed in ["0", "7"] {
            let p = generate(&dir, "s.json", &["random-orbit", "--class", class, "--seed", seed]);
            let rep = ok_json(&["classify", path_str(&p), "--exact"]);
            assert_eq!(rep["class"], class, "seed {seed}");
            assert!(dir.path().join("s.witness.json").exists());
        }
    }
}

#[test]
fn canonical_d3_matches_the_table() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "d3.json", &["canonical:D3"]);
    let data = rational_strings(&read(&p));
    assert_eq!(data, ["1/1", "0/1", "0/1", "0/1", "0/1", "1/1", "1/1", "0/1"]);
}

#[test]
fn zero_and_generic_inputs() {
    let dir = TempDir::new().unwrap();
    let zero = write_f64(&dir, "z.json", &[2, 2, 2], &[0.0; 8]);
    assert_eq!(ok_json(&["classify", path_str(&zero)])["class"], "D0");

    let data: Vec<f64> = (0..27).map(|i| ((i as f64 + 2.0).sqrt() * 7.0).fract() - 0.5).collect();
    let generic = write_f64(&dir, "g.json", &[3, 3, 3], &data);
    let out = run(&["classify", path_str(&generic)]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["class"].is_null());
    assert_eq!(v["mlrank"], json!([3, 3, 3]));
}

#[test]
fn dsl_sequence_term_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a10.json", &["dsl-seq", "--n", "10"]);
    let data = rational_strings(&read(&p));
    assert_eq!(data, ["0/1", "1/1", "1/1", "1/10", "1/1", "1/10", "1/10", "1/100"]);
    let side = read(&dir.path().join("a10.witness.json"));
    assert_eq!(side["n"], 10);
    assert_eq!(side["witness"]["terms"].as_array().unwrap().len(), 2);
    assert_eq!(side["limit_rank"]["rank"], 3);
    assert_eq!(ok_json(&["classify", path_str(&p)])["class"], "G2");
}

#[test]
fn leibniz_limit_has_six_unit_entries() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "l.json", &["leibniz", "--k", "3", "--a", "1,1"]);
    let data = rational_strings(&read(&p));
    assert_eq!(data.len(), 27);
    assert_eq!(data.iter().filter(|x| *x == "1/1").count(), 6);
    assert!(data.iter().all(|x| x == "1/1" || x == "0/1"));
}

#[test]
fn sequence_generators_emit_witnesses() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "gap.json", &["gap", "--r", "5", "--s", "2", "--n", "3"]);
    let side = read(&dir.path().join("gap.witness.json"));
    assert_eq!(side["witness"]["terms"].as_array().unwrap().len(), 5);
    assert_eq!(side["limit_rank"]["rank"], 7);
    assert_eq!(side["limit_rank"]["provenance"], "asserted-from-theorem");

    let p = generate(&dir, "r.json", &["rank-plus-one", "--shape", "3,3,3", "--r", "3", "--n", "4"]);
    assert_eq!(read(&p)["shape"], json!([3, 3, 3]));
    assert_eq!(read(&dir.path().join("r.witness.json"))["limit_rank"]["rank"], 4);
}

#[test]
fn fit_examples() {
    let dir = TempDir::new().unwrap();
    let g2 = generate(&dir, "g2.json", &["canonical:G2"]);
    let v = ok_json(&["fit", path_str(&g2), "--rank", "2"]);
    assert!(v["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["degeneracy"]["degenerate"], false);

    let g3 = generate(&dir, "g3.json", &["canonical:G3"]);
    let v = ok_json(&["fit", path_str(&g3), "--rank", "2", "--max-iter", "3000", "--tol", "0"]);
    assert_eq!(v["degeneracy"]["degenerate"], true);

    let dec = write_f64(&dir, "dec.json", &[2, 2, 2], &[1.0, 2.0, 2.0, 4.0, -1.0, -2.0, -2.0, -4.0]);
    let v = ok_json(&["fit", path_str(&dec), "--rank", "1"]);
    assert!(v["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn weak2_examples() {
    let dir = TempDir::new().unwrap();
    let g3 = generate(&dir, "g3.json", &["canonical:G3"]);
    let v = ok_json(&["weak2", path_str(&g3)]);
    assert!(v["residual"].as_f64().unwrap() > 0.1);
    assert_eq!(v["approximant"]["class"], "D3");

    let d3 = generate(&dir, "d3.json", &["canonical:D3"]);
    assert!(ok_json(&["weak2", path_str(&d3)])["residual"].as_f64().unwrap() <= 1e-6);

    let g2 = generate(&dir, "g2.json", &["canonical:G2"]);
    let v = ok_json(&["weak2", path_str(&g2)]);
    assert!(v["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["model"]["family"], "two-term");
}

#[test]
fn bregman_of_identical_inputs_is_zero() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["dsl"]);
    let b = generate(&dir, "b.json", &["dsl-seq", "--n", "1000"]);
    let same = ok_json(&["bregman", path_str(&a), path_str(&a)]);
    assert_eq!(same["d_ab"].as_f64(), Some(0.0));
    let v = ok_json(&["bregman", path_str(&a), path_str(&b)]);
    assert!(v["d_ab"].as_f64().unwrap() <= 1e-4 && v["d_ba"].as_f64().unwrap() <= 1e-4);
}

#[test]
fn table_reproduction() {
    let out = run(&["reproduce-table1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.contains("| G3 | [1 0; 0 1] | [0 -1; 1 0] | - | (2,2,2) | 3 | 3 |"));
    assert!(text.contains("| D3 | [1 0; 0 0] | [0 1; 1 0] | 0 | (2,2,2) | 3 | 2 |"));
}

#[test]
fn degeneracy_demo_flags_g3() {
    let v = ok_json(&["degeneracy-demo", "--max-iter", "2000"]);
    assert_eq!(v["report"]["degenerate"], true);
    assert_eq!(v["weak_rank2"]["approximant"]["class"], "D3");
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["classify", "/nonexistent/t.json"]).status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"shape":[2,2,2],"scalar":"f64","data":[1,2,3]}"#).unwrap();
    assert_eq!(run(&["classify", path_str(&bad)]).status.code(), Some(1));
    let out = dir.path().join("x.json");
    assert_eq!(run(&["generate", "nope", "--out", path_str(&out)]).status.code(), Some(1));
    assert_eq!(run(&["generate", "gap", "--r", "1", "--s", "1"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "canonical:G4"]).status.code(), Some(1));
}

#[test]
fn outputs_repeat_across_runs() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["random-orbit", "--class", "G3", "--seed", "11"]);
    let a_bytes = fs::read(&a).unwrap();
    let b = generate(&dir, "b.json", &["random-orbit", "--class", "G3", "--seed", "11"]);
    assert_eq!(a_bytes, fs::read(&b).unwrap());
    assert_eq!(run(&["classify", path_str(&a)]).stdout, run(&["classify", path_str(&b)]).stdout);

    // elapsed_ms is wall-clock and excluded
    let strip = |p: &Path| -> Vec<String> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let (t1, t2) = (dir.path().join("t1.csv"), dir.path().join("t2.csv"));
    for t in [&t1, &t2] {
        ok_json(&["fit", path_str(&a), "--rank", "2", "--seed", "3", "--max-iter", "300", "--trace", path_str(t)]);
    }
    assert_eq!(strip(&t1), strip(&t2));
    assert!(fs::read_to_string(&t1).unwrap().starts_with("iter,residual,lambda_1,lambda_2,cos_mode1,cos_mode2,cos_mode3,elapsed_ms\n"));
}
