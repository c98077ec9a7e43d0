use std::path::Path;
use std::process::{Command, Output};

use robin_wander::mesh::{build_half_disk_mesh, HalfDiskMesh};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robin-wander"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn transverse_sign_example() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&run(&["transverse", "--a0", "0.5", "--variant", "sign", "--kmax", "3"], dir.path()));
    let eig: Vec<f64> = serde_json::from_value(v["summary"]["eigenvalues"].clone()).unwrap();
    assert_eq!(eig, vec![-4.0, 1.0, 4.0, 9.0]);
}

#[test]
fn extension_contains_zero() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&run(&["extension", "--theta", "0", "--R", "1", "--b0", "1", "--window", "-0.1:0.1"], dir.path()));
    let values: Vec<f64> = v["spectrum"]["eigenpairs"].as_array().unwrap().iter().map(|p| p["value"].as_f64().unwrap()).collect();
    assert!(values.iter().any(|l| l.abs() < 1e-10), "{values:?}");
}

#[test]
fn mesh_round_trip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["mesh", "--R", "1", "--hmax", "0.25", "--rmin", "0.25", "--ratio", "2", "--out", "m.json"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("m.json")).unwrap();
    let loaded = HalfDiskMesh::from_json(&text).unwrap();
    let built = build_half_disk_mesh(1.0, 0.25, 0.25, 2.0).unwrap();
    assert_eq!(loaded.nodes, built.nodes);
    assert_eq!(loaded.triangles, built.triangles);
    assert_eq!(loaded.to_json().unwrap(), built.to_json().unwrap());
    // the written file is accepted back by the solver
    let v = json_of(&run(&["fem", "--mesh", "m.json", "--neumann", "--window", "-1:5"], dir.path()));
    assert!(v["spectrum"]["eigenpairs"].as_array().unwrap().iter().any(|p| p["value"].as_f64().unwrap().abs() < 1e-6));
}

#[test]
fn manifest_lists_outputs_with_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"a0": 2.0, "variant": "abs", "kmax": 2}"#).unwrap();
    let out = run(&["transverse", "--config", "c.json", "--kmax", "4", "--out", "t.json"], dir.path());
    assert!(out.status.success());
    let t: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    // flags override the file
    assert_eq!(t["config"]["kmax"], 4);
    assert_eq!(t["config"]["a0"], 2.0);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["t.json"]["command"], "transverse");
    assert_eq!(m["t.json"]["config"]["variant"], "abs");
    assert_eq!(m["t.json"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["transverse"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["transverse", "--a0", "-1"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), r#"{"a0": 1.0, "colour": "red"}"#).unwrap();
    let out = run(&["transverse", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    // outside the supported kernel range is a computation failure
    assert_eq!(run(&["kernel", "--zeta", "1e5", "--b0", "1"], dir.path()).status.code(), Some(1));
    let out = bin().args(["transverse", "--a0", "1"]).env("ROBIN_WANDER_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_is_honoured() {
    let out = bin().args(["coverage", "--ntheta", "16"]).env("ROBIN_WANDER_THREADS", "1").output().unwrap();
    assert!(out.status.success());
}

#[test]
fn plots_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["coverage", "--interval", "0:5", "--ntheta", "32", "--out", "cov.json"], dir.path()).status.success());
    for (kind, name) in [("coverage", "a.svg"), ("coverage", "b.svg"), ("spectrum-vs-lntheta", "c.svg")] {
        let out = run(&["plot", "--input", "cov.csv", "--kind", kind, "--interval", "0:5", "--out", name], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.svg")).unwrap();
    let b = std::fs::read(dir.path().join("b.svg")).unwrap();
    assert_eq!(a, b);
    std::fs::write(dir.path().join("empty.csv"), "eps,ln_eps,theta_eps,lambda,family,mismatch\n").unwrap();
    let out = run(&["plot", "--input", "empty.csv", "--kind", "spectrum-vs-lneps"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("empty table"));
    assert_eq!(run(&["plot", "--input", "empty.csv", "--kind", "histogram"], dir.path()).status.code(), Some(2));
}

#[test]
fn sweep_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--periods", "1", "--samples-per-period", "8", "--hmax", "0.2", "--window", "-5:5"];
    for out in ["s1", "s2"] {
        let mut a = args.to_vec();
        a.extend(["--out", out]);
        let o = run(&a, dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("s1"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"mismatch.csv".to_string()) && names.contains(&"sweep.json".to_string()));
    assert_eq!(names.iter().filter(|n| n.starts_with("eps_")).count(), 9);
    for n in &names {
        let a = std::fs::read(dir.path().join("s1").join(n)).unwrap();
        let b = std::fs::read(dir.path().join("s2").join(n)).unwrap();
        assert_eq!(a, b, "{n} differs between identical runs");
    }
    let header = std::fs::read_to_string(dir.path().join("s1/mismatch.csv")).unwrap();
    assert!(header.starts_with("eps,ln_eps,theta_eps,lambda,family,mismatch"));
}

#[test]
fn verify_subset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--only", "1,2,3"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.contains(" PASS ")).count(), 3);
    assert_eq!(run(&["verify", "--only", "11"], dir.path()).status.code(), Some(2));
}
