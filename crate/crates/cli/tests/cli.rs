use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dfep::DecisionTree;

fn dfep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfep")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn summary(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or_default().to_string()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/patients.csv")
}

fn root_label(o: &Output) -> String {
    let text = stdout(o);
    let json = &text[..text.rfind("max_cost=").unwrap()];
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    let root = v["root"].as_u64().unwrap() as usize;
    v["nodes"][root]["test_label"].as_str().unwrap().to_string()
}

#[test]
fn outlier_budget_two_misclassifies_four() {
    let o = dfep(&["build", "--synthetic", "outlier", "--impurity", "pairs", "--budget", "2"]);
    assert!(o.status.success());
    assert_eq!(summary(&o), "max_cost=2 error=4/1024 leaves=4");
    let full = dfep(&["build", "--synthetic", "outlier"]);
    assert!(summary(&full).starts_with("max_cost=10 error=0/1024 "), "{}", summary(&full));
}

#[test]
fn fig1_root_choices() {
    assert_eq!(root_label(&dfep(&["build", "--synthetic", "fig1", "--impurity", "pairs"])), "t2");
    assert_eq!(root_label(&dfep(&["build", "--synthetic", "fig1", "--impurity", "hinged:8"])), "t1");
}

#[test]
fn incomplete_instance_exits_3_and_names_objects() {
    let o = dfep(&["build", "--synthetic", "fig1-core"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("[0, 1, 2"), "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    for args in [
        vec!["build", empty.to_str().unwrap()],
        vec!["build", "/nonexistent/data.csv"],
        vec!["build", "--synthetic", "outlier", "--impurity", "poly:x1"],
        vec!["build", "--synthetic", "outlier", "--impurity", "powers:1"],
        vec!["build", "--synthetic", "outlier", "--bogus"],
        vec!["build"],
        vec!["sweep", "--synthetic", "outlier", "--budget-grid", "5..1"],
        vec!["sweep", "--synthetic", "outlier", "--alpha-grid", "0..2"],
        vec!["audit", "--synthetic", "outlier"],
    ] {
        assert_eq!(dfep(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn tree_and_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    let trace = dir.path().join("trace.json");
    let o = dfep(&[
        "build",
        "--synthetic",
        "outlier",
        "--delta-frac",
        "1/4",
        "--output",
        tree.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
    let t = DecisionTree::from_json(&std::fs::read_to_string(&tree).unwrap()).unwrap();
    t.validate(&dfep::data::gen_synthetic_outlier()).unwrap();
    let trace: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(trace["impurity"], "pairs");
    assert!(!trace["nodes"].as_array().unwrap().is_empty());
}

#[test]
fn csv_input_builds_zero_error_tree() {
    let o = dfep(&["build", fixture().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(summary(&o).contains("error=0/82"), "{}", summary(&o));
    assert!(stderr(&o).contains("rejected 3 rows"));
}

#[test]
fn outlier_budget_sweep() {
    let o = dfep(&["sweep", "--synthetic", "outlier", "--budget-grid", "0..10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "impurity,parameter,max_cost,error,error_decimal,leaves,status");
    assert_eq!(rows.len(), 12);
    assert!(rows[3].starts_with("pairs,2,2,4/1024,"));
    assert!(rows[11].starts_with("pairs,10,10,0/1024,"));
    assert_eq!(text, stdout(&dfep(&["sweep", "--synthetic", "outlier", "--budget-grid", "0..10"])));
}

#[test]
fn single_point_sweep_matches_build() {
    let s = dfep(&["sweep", "--synthetic", "outlier", "--budget-grid", "3"]);
    let b = dfep(&["build", "--synthetic", "outlier", "--budget", "3"]);
    let row: Vec<String> = stdout(&s).lines().nth(1).unwrap().split(',').map(str::to_string).collect();
    assert_eq!(summary(&b), format!("max_cost={} error={} leaves={}", row[2], row[3], row[5]));
}

fn errors(csv: &str) -> Vec<u64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().split('/').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn best_of_is_pointwise_minimum() {
    let grid = ["--budget-grid", "0..10"];
    let mut args = vec!["sweep", "--synthetic", "outlier", "--impurity", "powers:2,powers:3,hinged:8", "--best-of"];
    args.extend(grid);
    let best = errors(&stdout(&dfep(&args)));
    assert_eq!(best.len(), 11);
    for f in ["powers:2", "powers:3", "hinged:8"] {
        let mut a = vec!["sweep", "--synthetic", "outlier", "--impurity", f];
        a.extend(grid);
        let single = errors(&stdout(&dfep(&a)));
        assert!(best.iter().zip(&single).all(|(b, s)| b <= s), "{f}");
    }
}

#[test]
fn sweep_writes_svg_and_respects_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("curve.svg");
    let csv = dir.path().join("curve.csv");
    let args = [
        "sweep",
        "--synthetic",
        "outlier",
        "--alpha-grid",
        "0,1/2,8",
        "--impurity",
        "hinged:0",
        "--output",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ];
    let o = Command::new(env!("CARGO_BIN_EXE_dfep")).args(args).env("DFEP_THREADS", "1").output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let first = std::fs::read_to_string(&csv).unwrap();
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert!(first.contains("hinged:1/2,1/2,"));
    assert!(dfep(&args).status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);
}

#[test]
fn audits() {
    assert_eq!(dfep(&["audit", "--admissibility", "pairs", "--n", "8"]).status.code(), Some(0));
    let bad = dfep(&["audit", "--admissibility", "poly:x1"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(stdout(&bad).contains("witness purity"));
    let approx = dfep(&["audit", "--approximation", "--random", "50", "--seed", "7"]);
    assert_eq!(approx.status.code(), Some(0));
    assert!(summary(&approx).starts_with("audited=50 "));
    assert_eq!(dfep(&["audit", "--approximation", "--synthetic", "outlier"]).status.code(), Some(5));
    assert_eq!(dfep(&["audit", "--error-bounds", "--random", "20", "--alpha", "2", "--offset"]).status.code(), Some(0));
    assert_eq!(dfep(&["audit", "--embedding", "--random", "3"]).status.code(), Some(0));
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# outlier run\nsynthetic = outlier\nbudget = 2\n").unwrap();
    let o = dfep(&["--config", conf.to_str().unwrap(), "build"]);
    assert_eq!(summary(&o), "max_cost=2 error=4/1024 leaves=4");
    let o = dfep(&["build", "--config", conf.to_str().unwrap(), "--budget", "1"]);
    assert_eq!(summary(&o), "max_cost=1 error=512/1024 leaves=2");
    std::fs::write(&conf, "unknown_flag = 3\n").unwrap();
    assert_eq!(dfep(&["--config", conf.to_str().unwrap(), "build"]).status.code(), Some(2));
}
