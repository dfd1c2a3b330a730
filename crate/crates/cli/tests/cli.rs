use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracrel"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn validate(path: &Path) -> (Output, Vec<String>) {
    let out = bin().args(["validate", "--config"]).arg(path).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let problems = v["problems"].as_array().unwrap().iter().map(|p| p.as_str().unwrap().to_string()).collect();
    (out, problems)
}

fn run(config: &Path, out_dir: &Path) -> Output {
    bin().args(["run", "--config"]).arg(config).arg("--out").arg(out_dir).output().unwrap()
}

fn repo_configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn lists_every_scenario() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(
        names,
        [
            "constants",
            "angular",
            "hardy",
            "extension_test",
            "kernel_test",
            "separable_frequency",
            "halfdisk_pipeline",
            "blowup",
            "beta"
        ]
    );
}

#[test]
fn shipped_configs_validate_clean() {
    let configs = repo_configs();
    assert_eq!(configs.len(), 9);
    for c in configs {
        let (out, problems) = validate(&c);
        assert!(problems.is_empty(), "{}: {problems:?}", c.display());
        assert_eq!(out.status.code(), Some(0));
    }
}

#[test]
fn missing_chi_reports_one_problem() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        "c.json",
        r#"{"scenario":"angular","params":{"n":1,"s":0.25,"h":{"kind":"power","c_h":0.1}}}"#,
    );
    let (out, problems) = validate(&c);
    assert_eq!(problems.len(), 1, "{problems:?}");
    assert!(problems[0].contains("chi"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_hardy_constant_is_inadmissible() {
    // 10 Λ_{2,1/2} = 20 Γ(3/4)² / Γ(1/4)²
    let a0 = 10.0 * 0.228_473_290_522_231_9;
    let dir = tempfile::tempdir().unwrap();
    let body = format!(r#"{{"scenario":"angular","params":{{"n":2,"s":0.5,"a":{{"kind":"constant","value":{a0}}}}}}}"#);
    let c = write_config(dir.path(), "c.json", &body);
    let (_, problems) = validate(&c);
    assert_eq!(problems.len(), 1, "{problems:?}");
    assert!(problems[0].contains("inadmissible"), "{problems:?}");
}

#[test]
fn malformed_and_unknown_fields_are_problems() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", "{not json");
    assert_eq!(validate(&bad).1.len(), 1);
    let extra = write_config(dir.path(), "extra.json", r#"{"scenario":"constants","params":{"n":1,"s":0.5},"bogus":1}"#);
    assert!(validate(&extra).1[0].contains("bogus"));
    let unknown = write_config(dir.path(), "u.json", r#"{"scenario":"nope","params":{"n":1,"s":0.5}}"#);
    assert!(validate(&unknown).1[0].contains("nope"));
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        "c.json",
        r#"{"scenario":"halfdisk_pipeline","params":{"n":1,"s":0.25,"a":{"kind":"two_point","minus":0.1,"plus":0.1},
            "h":{"kind":"power","c_h":0.1,"chi":0.5}},"grid":{"rho_min":1e-4,"n_rho":128,"grid_n":64}}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = run(&c, &a);
    let rb = run(&c, &b);
    assert_eq!(ra.status.code(), rb.status.code());
    for f in ["results.json", "trace.csv", "blowup.csv", "solution.csv"] {
        let x = fs::read(a.join(f)).unwrap();
        assert_eq!(x, fs::read(b.join(f)).unwrap(), "{f} differs between runs");
    }
    let sol = fs::read_to_string(a.join("solution.csv")).unwrap();
    assert!(sol.starts_with("rho,alpha,w\n"));
    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(trace.starts_with("r,H,D,N,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "g.json", r#"{"scenario":"constants","params":{"n":3,"s":0.5}}"#);
    let out = run(&good, &dir.path().join("g"));
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g/results.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["scenario"], "constants");
    let k = &v["checks"]["kappa_route_gap"];
    assert!(k["value"].as_f64().unwrap() <= k["tolerance"].as_f64().unwrap());
    // κ_{1/2} = 1, Λ_{3,1/2} = 2/π
    assert!((v["values"]["kappa_s"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["values"]["lambda_ns"].as_f64().unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-12);

    // coarse sampling with a large mass: the H' identity check fails
    let failing = write_config(
        dir.path(),
        "f.json",
        r#"{"scenario":"separable_frequency","params":{"n":1,"s":0.5,"m":5.0},
            "trace":{"r_max":1.0,"r_min":0.001,"samples_per_decade":2}}"#,
    );
    let out = run(&failing, &dir.path().join("f"));
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("f/results.json")).unwrap()).unwrap();
    assert_eq!(v["checks"]["hprime_residual"]["pass"], Value::Bool(false));

    let invalid = write_config(dir.path(), "i.json", r#"{"scenario":"constants"}"#);
    assert_eq!(run(&invalid, &dir.path().join("i")).status.code(), Some(1));
}
