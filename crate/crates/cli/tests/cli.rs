use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn eqih(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_eqih"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn eqih");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    child.wait_with_output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn fixture_file(dir: &tempfile::TempDir, name: &str) -> String {
    let path = dir.path().join(format!("{name}.json"));
    let out = eqih(&["fixture", name, "-o", path.to_str().unwrap()], None);
    assert!(out.status.success());
    path.to_str().unwrap().to_string()
}

#[test]
fn hopf_through_stdin() {
    let model = eqih(&["fixture", "HOPF"], None);
    assert!(model.status.success());
    let text = String::from_utf8(model.stdout).unwrap();
    let out = eqih(&["cohomology", "-p", ""], Some(&text));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "eqih-report/1");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["ih_b"], serde_json::json!([1, 0, 1]));
    assert_eq!(r["result"]["ih_x"], serde_json::json!([1, 0, 0, 1]));
}

#[test]
fn rot_localizes_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let rot = fixture_file(&dir, "ROT");
    let out = eqih(&["localize", &rot, "-p", ""], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!((r["result"]["even"].as_u64(), r["result"]["odd"].as_u64()), (Some(0), Some(0)));
}

#[test]
fn cone_commands_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cone = fixture_file(&dir, "CONE2");
    for args in [
        vec!["validate", &cone, "--strict"],
        vec!["gysin", &cone, "-p", "apex=2"],
        vec!["equivariant", &cone, "-p", "apex=2", "--nu", "9"],
        vec!["spectral", &cone, "-p", "apex=2", "--d3-check"],
        vec!["skjelbred", &cone],
        vec!["localize", &cone, "-p", "apex=1", "--cone-check"],
    ] {
        let out = eqih(&args, None);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn equivariant_dims_of_the_cone() {
    let dir = tempfile::tempdir().unwrap();
    let cone = fixture_file(&dir, "CONE2");
    let r = report(&eqih(&["equivariant", &cone, "-p", "apex=2", "--nu", "6"], None));
    assert_eq!(r["result"]["dims"], serde_json::json!([1, 0, 1, 0, 1, 0, 1]));
}

#[test]
fn compare_with_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cone = fixture_file(&dir, "CONE2");
    let model = eqih::model::Model::from_json(&std::fs::read_to_string(&cone).unwrap()).unwrap();
    let iso = dir.path().join("iso.json");
    std::fs::write(&iso, eqih::classify::ModelIso::identity(&model).to_json()).unwrap();
    let out = eqih(&["compare", &cone, &cone, "--iso", iso.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\", \"top_degree\": ").unwrap();
    let out = eqih(&["cohomology", bad.to_str().unwrap(), "-p", ""], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["status"], "input_error");
}

#[test]
fn unknown_stratum_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cone = fixture_file(&dir, "CONE2");
    let out = eqih(&["cohomology", &cone, "-p", "nowhere=1"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_model_exits_2_but_validate_exits_1() {
    let mut m = eqih::fixtures::noperv();
    m.d[0] = eqih::ratla::Matrix::from_i64(1, 1, &[1]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, m.to_json()).unwrap();
    let path = path.to_str().unwrap();
    assert_eq!(eqih(&["cohomology", path, "-p", "apex=0"], None).status.code(), Some(2));
    let v = eqih(&["validate", path], None);
    assert_eq!(v.status.code(), Some(1));
    assert_eq!(report(&v)["status"], "fail");
}

#[test]
fn unknown_fixture_exits_2() {
    assert_eq!(eqih(&["fixture", "NOPE"], None).status.code(), Some(2));
}

#[test]
fn human_output_is_not_json() {
    let text = String::from_utf8(eqih(&["fixture", "HOPF"], None).stdout).unwrap();
    let out = eqih(&["--human", "cohomology", "-p", ""], Some(&text));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("ih_b: [1, 0, 1]"), "{s}");
}

#[test]
fn selftest_small() {
    let out = eqih(&["selftest", "--seeds", "2"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["criteria"].as_array().unwrap().len(), 9);
}
