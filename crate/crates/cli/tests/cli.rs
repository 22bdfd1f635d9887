use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tightspan")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn result_line(o: &Output) -> String {
    stdout(o).lines().find(|l| l.starts_with("#RESULT")).expect("summary line").to_string()
}

#[test]
fn certify_square() {
    let out = run(&["certify", fixture("square.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(result_line(&out), "#RESULT certified length 4 vertices 4 tightspan-vertices 4");
    assert!(stdout(&out).contains("[homeomorphism]"));
}

#[test]
fn check_splits_on_cube() {
    let out = run(&["check-splits", fixture("cube.splits").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("weakly-compatible: yes, two-compatible: no, octahedral-free: yes"));
}

#[test]
fn cube_cannot_be_certified() {
    let out = run(&["certify", fixture("cube.splits").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not two-decomposable"));
}

#[test]
fn triangle_violation_names_the_triple() {
    let out = run(&["validate", fixture("triangle_violation.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d(x,z) > d(x,y) + d(y,z)"));
}

#[test]
fn realize_tree_summary() {
    let out = run(&["realize", fixture("tree.splits").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(result_line(&out), "#RESULT optimum 6 gamma 6 vertices 6");
}

#[test]
fn exhausted_budget_exits_two() {
    let out = run(&["realize", fixture("tree.splits").to_str().unwrap(), "--node-budget", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tightspan_routes_agree() {
    let out = run(&["tightspan", fixture("tree.splits").to_str().unwrap()]);
    assert_eq!(result_line(&out), "#RESULT vertices 6 edges 5 routes-agree yes");
}

#[test]
fn buneman_counts_cube() {
    let out = run(&["buneman", fixture("cube.splits").to_str().unwrap()]);
    assert_eq!(result_line(&out), "#RESULT vertices 8 edges 12 quads 6");
}

#[test]
fn decompose_round_trips_through_a_file() {
    let out = run(&["decompose", fixture("square.txt").to_str().unwrap()]);
    let text = stdout(&out);
    let splits: String = text.lines().filter(|l| !l.starts_with("#RESULT")).map(|l| format!("{l}\n")).collect();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(splits.as_bytes()).unwrap();
    let again = run(&["decompose", file.path().to_str().unwrap()]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn dot_output_boxes_terminals() {
    let out = run(&["dot", fixture("square.txt").to_str().unwrap(), "--graph", "realisation"]);
    let text = stdout(&out);
    assert!(text.starts_with("graph realisation {"));
    assert_eq!(text.matches("shape=box").count(), 4);
}

#[test]
fn output_is_deterministic() {
    let args = ["certify", "--corpus", "3", "--seed", "7"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    assert_eq!(run(&args).status.code(), Some(0));
}

#[test]
fn malformed_input_exits_one() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "3\na b\n1").unwrap();
    let out = run(&["validate", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
