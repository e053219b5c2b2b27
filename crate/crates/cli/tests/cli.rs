use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn surfdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfdyn")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_accepts_corpus() {
    for entry in fs::read_dir(corpus("")).unwrap() {
        let path = entry.unwrap().path();
        let o = surfdyn(&["validate", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
        assert_eq!(stdout(&o), "valid\n");
    }
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"pieces\": [\n    {\"id\": 0,,}\n  ]\n}\n").unwrap();
    let o = surfdyn(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn invalid_graph_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(corpus("case3_branch.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["pieces"][0]["genus"] = serde_json::json!(1);
    let path = dir.path().join("invalid.json");
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = surfdyn(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("invalid graph"));
}

#[test]
fn condense_matches_fixture_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let input = corpus("bouquet_hub.json");
    for out in [&a, &b] {
        let o = surfdyn(&["condense", input.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let first = fs::read_to_string(&a).unwrap();
    assert_eq!(first, fs::read_to_string(&b).unwrap());
    assert_eq!(first, fs::read_to_string(corpus("bouquet_hub.expected.json")).unwrap());
}

#[test]
fn adjust_then_condense_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let adj = dir.path().join("adj.json");
    let con = dir.path().join("con.json");
    let o = surfdyn(&["adjust", corpus("fo_merge.json").to_str().unwrap(), "-o", adj.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("1 merges"));
    assert!(fs::read_to_string(&adj).unwrap().contains("\"stage\": \"adjusted\""));
    let o = surfdyn(&["condense", adj.to_str().unwrap(), "-o", con.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = surfdyn(&["classes", con.to_str().unwrap(), "--max-period", "4", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let classes: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(classes.as_array().unwrap().len(), 6);
}

#[test]
fn classes_with_external_census() {
    let dir = tempfile::tempdir().unwrap();
    let census = dir.path().join("census.json");
    fs::write(&census, r#"{"1": {"1": 3}}"#).unwrap();
    let o = surfdyn(&[
        "classes",
        corpus("pa_pair_direct.json").to_str().unwrap(),
        "--max-period",
        "2",
        "--census",
        census.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("interior_pa"), "{text}");
    assert!(text.contains("x3"), "{text}");
    assert!(text.contains("census absent: N0"), "{text}");
}

#[test]
fn report_formats() {
    let input = corpus("bouquet_hub.json");
    let text = surfdyn(&["report", input.to_str().unwrap()]);
    assert!(text.status.success());
    assert!(stdout(&text).contains("pinched boundary points"));
    let dot = surfdyn(&["report", input.to_str().unwrap(), "--format", "dot"]);
    assert!(stdout(&dot).starts_with("digraph orbits {"));
    let json = surfdyn(&["report", input.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert!(v["classes"].is_array());
}

#[test]
fn shadow_match_small() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pairs.csv");
    let o = surfdyn(&["shadow", "match", "--max-period", "3", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("period 3: 16 points"));
    let rows = fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(rows, 1 + 1 + 5 + 16);
}

#[test]
fn shadow_rejects_bad_input() {
    let o = surfdyn(&["shadow", "expansion", "--matrix", "1,1,0,1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = surfdyn(&["shadow", "match", "--eps", "0.9", "--max-period", "2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn shadow_flip_rigid() {
    let o = surfdyn(&["shadow", "flip", "--rigid", "1/3", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["fixed_points"]["index_sum"], 2);
}
