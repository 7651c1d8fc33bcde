use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use preserver::format::{canonical_from_json, map_from_json, map_to_json, matrix_from_value};
use preserver::matcore::{is_disjoint, is_partial_isometry};
use preserver::{Field, LinMap, Mat, Tolerances};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_preserver"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_map(name: &str, phi: &LinMap) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, map_to_json(phi)).unwrap();
    path
}

fn gen_to_file(name: &str, args: &[&str]) -> PathBuf {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let path = scratch(name);
    std::fs::write(&path, &o.stdout).unwrap();
    path
}

#[test]
fn decompose_identity_and_zero() {
    let id = write_map("identity.json", &LinMap::identity(2, 3, Field::Real));
    let o = run(&["decompose", id.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let c = canonical_from_json(&stdout(&o)).unwrap();
    assert_eq!(c.q1(), &[1.0][..]);
    assert!(c.q2().is_empty());

    let zero = write_map("zero.json", &LinMap::zero(2, 2, 3, 3, Field::Complex));
    let o = run(&["decompose", zero.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["Q1"], Value::Array(vec![]));
    assert_eq!(v["Q2"], Value::Array(vec![]));
}

#[test]
fn decompose_perturbed_map_exits_two_with_witness() {
    let path = gen_to_file(
        "perturbed.json",
        &[
            "--kind",
            "canonical",
            "--m",
            "3",
            "--n",
            "2",
            "--q1",
            "1",
            "--q2",
            "1",
            "--seed",
            "4",
            "--perturb",
            "0.1",
        ],
    );
    let o = run(&["decompose", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["kind"], "NotPreserver");
    assert!(v["residual"].as_f64().unwrap() > 0.0);
    let w = v["witness"].as_array().unwrap();
    assert_eq!(w.len(), 2);
    let a = matrix_from_value(&w[0], Field::Real).unwrap();
    let b = matrix_from_value(&w[1], Field::Real).unwrap();
    let tol = Tolerances::default();
    assert!(is_disjoint(&a, &b, &tol).unwrap());
    let phi = map_from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!is_disjoint(&phi.apply(&a).unwrap(), &phi.apply(&b).unwrap(), &tol).unwrap());
}

#[test]
fn decompose_io_and_parse_errors_exit_one() {
    assert_eq!(
        run(&["decompose", "/nonexistent/map.json"]).status.code(),
        Some(1)
    );
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"m\": 2}").unwrap();
    let o = run(&["decompose", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn generated_canonical_file_is_accepted() {
    let path = gen_to_file(
        "gen7.json",
        &[
            "--kind",
            "canonical",
            "--m",
            "2",
            "--n",
            "2",
            "--r",
            "2",
            "--s",
            "2",
            "--q1",
            "1",
            "--q2",
            "0",
            "--seed",
            "7",
        ],
    );
    assert_eq!(
        run(&["decompose", path.to_str().unwrap()]).status.code(),
        Some(0)
    );
}

#[test]
fn gen_is_deterministic_and_infeasible_requests_fail() {
    let args = [
        "gen",
        "--kind",
        "canonical",
        "--m",
        "2",
        "--n",
        "3",
        "--q1",
        "1",
        "--q2",
        "1",
        "--field",
        "complex",
        "--seed",
        "11",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let o = run(&[
        "gen",
        "--kind",
        "canonical",
        "--m",
        "3",
        "--n",
        "3",
        "--r",
        "2",
        "--q1",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_disjoint_pair_and_pisom() {
    let o = run(&[
        "gen",
        "--kind",
        "disjoint-pair",
        "--m",
        "3",
        "--n",
        "3",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let ms = v["matrices"].as_array().unwrap();
    let a = matrix_from_value(&ms[0], Field::Real).unwrap();
    let b = matrix_from_value(&ms[1], Field::Real).unwrap();
    assert!(is_disjoint(&a, &b, &Tolerances::default()).unwrap());

    let o = run(&[
        "gen", "--kind", "pisom", "--m", "2", "--n", "3", "--rank", "0",
    ]);
    let p = matrix_from_value(&json(&o)["matrix"], Field::Real).unwrap();
    assert_eq!(p, Mat::zeros(2, 3, Field::Real));

    let o = run(&[
        "gen", "--kind", "pisom", "--m", "3", "--n", "4", "--rank", "2", "--field", "complex",
    ]);
    let p = matrix_from_value(&json(&o)["matrix"], Field::Complex).unwrap();
    assert!(is_partial_isometry(&p, &Tolerances::default()));
}

#[test]
fn check_verdicts_and_exit_codes() {
    let id = write_map("identity-check.json", &LinMap::identity(2, 2, Field::Real));
    let id = id.to_str().unwrap();

    let o = run(&["check", id, "--class", "triple-hom"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "Yes");
    assert!(v.get("certificate").is_some());

    let o = run(&["check", id, "--class", "schatten", "--p", "2"]);
    assert_eq!(o.status.code(), Some(4));
    let v = json(&o);
    assert_eq!(v["verdict"], "Inapplicable");
    assert_eq!(v["detail"], "P_EQUALS_TWO");

    let o = run(&["check", id, "--class", "disjoint"]);
    assert_eq!(o.status.code(), Some(0));

    let half = gen_to_file(
        "kyfan.json",
        &[
            "--kind",
            "canonical",
            "--m",
            "2",
            "--n",
            "2",
            "--q1-values",
            "0.5",
            "--q2-values",
            "0.5",
            "--field",
            "complex",
        ],
    );
    let half = half.to_str().unwrap();
    let o = run(&[
        "check", half, "--class", "kyfan", "--k", "4", "--kprime", "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&[
        "check", half, "--class", "kyfan", "--k", "3", "--kprime", "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["detail"], "K_TOO_SMALL");
    let o = run(&["check", half, "--class", "triple-hom"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["detail"], "Q_NOT_IDENTITY");
}

#[test]
fn check_usage_errors_exit_one() {
    let id = write_map("identity-usage.json", &LinMap::identity(2, 2, Field::Real));
    let id = id.to_str().unwrap();
    assert_eq!(
        run(&["check", id, "--class", "schatten"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["check", id, "--class", "kyfan", "--k", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["check", id, "--class", "nonsense"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["check", id, "--class", "kyfan", "--k", "2", "--kprime", "9"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn fuzz_reports() {
    let o = run(&["fuzz", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["properties"], Value::Array(vec![]));

    let args = ["fuzz", "--trials", "100", "--max-dim", "3", "--seed", "42"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    assert_eq!(first.stdout, run(&args).stdout);
}

#[test]
fn map_file_round_trip_through_decompose() {
    let path = gen_to_file(
        "rt.json",
        &[
            "--kind",
            "canonical",
            "--m",
            "3",
            "--n",
            "2",
            "--q1",
            "2",
            "--q2",
            "1",
            "--field",
            "complex",
            "--seed",
            "5",
        ],
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let phi = map_from_json(&text).unwrap();
    assert_eq!(map_to_json(&phi) + "\n", text);
    let o = run(&["decompose", path.to_str().unwrap()]);
    let c = canonical_from_json(&stdout(&o)).unwrap();
    assert_eq!(c.q1().len(), 2);
    assert_eq!(c.q2().len(), 1);
}
