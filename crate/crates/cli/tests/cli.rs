use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qbg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbg")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn detect_on_southern_women_matches_barber_modularity() {
    let o = qbg(&["detect", &fixture("southern_women.tsv"), "--chi", "0", "--reproducible"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("\"schema_version\": \"1\""));
    assert!(text.contains("\"communities\": 4"));
    assert!(!text.contains("timing"));
}

#[test]
fn matrix_and_edge_list_give_the_same_optimum() {
    let a = stdout(&qbg(&["detect", &fixture("southern_women.tsv"), "--chi", "1", "--reproducible"]));
    let b = stdout(&qbg(&[
        "detect",
        &fixture("southern_women_biadjacency.csv"),
        "--chi",
        "1",
        "--reproducible",
    ]));
    let objective = |t: &str| t.lines().find(|l| l.contains("\"objective\"")).map(str::to_owned);
    assert!(objective(&a).is_some());
    assert_eq!(objective(&a), objective(&b));
}

#[test]
fn reproducible_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = qbg(&[
            "sweep",
            &fixture("southern_women.tsv"),
            "--chi-min",
            "-0.5",
            "--chi-max",
            "1.5",
            "--steps",
            "5",
            "--seed",
            "7",
            "--reproducible",
            "--out",
            s(out),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn timing_is_recorded_unless_reproducible() {
    let o = qbg(&["detect", &fixture("southern_women.tsv")]);
    assert!(stdout(&o).contains("elapsed_seconds"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("qbg.toml");
    fs::write(&config, "chi = 2.0\nrestarts = 2\nreproducible = true\n").unwrap();
    let from_file = stdout(&qbg(&["--config", s(&config), "detect", &fixture("southern_women.tsv")]));
    assert!(from_file.contains("\"chi\": 2.0"));
    assert!(from_file.contains("\"restarts\": 2"));
    assert!(!from_file.contains("timing"));
    let flagged = stdout(&qbg(&[
        "--config",
        s(&config),
        "detect",
        &fixture("southern_women.tsv"),
        "--chi",
        "-0.5",
    ]));
    assert!(flagged.contains("\"chi\": -0.5"));
    assert!(flagged.contains("\"restarts\": 2"));
}

#[test]
fn unknown_config_keys_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "chii = 1\n").unwrap();
    let o = qbg(&["--config", s(&config), "detect", &fixture("southern_women.tsv")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_2() {
    assert_eq!(qbg(&["detect", "/nonexistent/graph.tsv"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a\tx\t1\na\tx\t2\n").unwrap();
    let o = qbg(&["detect", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn infeasible_generator_specs_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbg(&["gen", "benchmark", "--d", "1.5", "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    let o = qbg(&["gen", "ring", "--n", "2", "--k", "2", "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn generated_ring_scores_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbg(&["gen", "ring", "--n", "4", "--k", "2", "--out-dir", s(dir.path())]);
    assert!(o.status.success());
    let graph = dir.path().join("graph.tsv");
    let split = dir.path().join("split.csv");
    let merged = dir.path().join("merged.csv");
    let e = stdout(&qbg(&["eval", s(&graph), "--partition", s(&split)]));
    assert!(e.contains("Q_b = 0.55"), "{e}");
    let e = stdout(&qbg(&["eval", s(&graph), "--partition", s(&merged)]));
    assert!(e.contains("Q_b = 0.4"), "{e}");
}

#[test]
fn generated_hierarchy_has_planted_levels() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbg(&["gen", "hierarchy", "--levels", "2", "--base", "2", "--branching", "3", "--out-dir", s(dir.path())]);
    assert!(o.status.success());
    let level1 = fs::read_to_string(dir.path().join("level1.csv")).unwrap();
    // header plus 6 red and 6 blue nodes
    assert_eq!(level1.lines().count(), 13);
    let out = dir.path().join("run.csv");
    let d = qbg(&[
        "detect",
        s(&dir.path().join("graph.tsv")),
        "--chi",
        "8",
        "--partition-csv",
        s(&out),
        "--dot",
        s(&dir.path().join("run.dot")),
        "--out",
        s(&dir.path().join("run.json")),
    ]);
    assert!(d.status.success());
    assert!(stdout(&d).contains("3 communities"), "{}", stdout(&d));
}

#[test]
fn phase_grid_csv() {
    let o = qbg(&["phase", "qbg", "--chi", "1", "--t", "100", "--p-axis", "0.5,1", "--d-axis", "0.1,0.9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,d,phase");
    assert_eq!(lines.len(), 5);
    let o = qbg(&["phase", "qb", "--t", "1e6", "--p-axis", "0.05:1:4", "--d-axis", "0.01:1:4"]);
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",M")));
}

#[test]
fn thresholds() {
    let o = stdout(&qbg(&["threshold", "ring", "--n", "12", "--k", "2"]));
    assert!(o.contains("merged preferred"), "{o}");
    let o = stdout(&qbg(&["threshold", "benchmark", "--p", "1", "--t", "1e6", "--chi", "1"]));
    assert!(o.contains("large-t limit: 0.828427"), "{o}");
}

/// Deterministic pseudo-random values in `[0, 1)`.
fn noise(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn sweeps_a_synthetic_83_by_18_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("patients.csv");
    let mut state = 83 * 18;
    let mut text = String::from("patient");
    for j in 0..18 {
        text.push_str(&format!(",cytokine{j}"));
    }
    text.push('\n');
    for i in 0..83 {
        text.push_str(&format!("p{i}"));
        for j in 0..18 {
            // three loose patient groups with elevated cytokine blocks
            let boost = if j / 6 == i % 3 { 2.0 } else { 0.0 };
            let v = noise(&mut state) + boost;
            let v = if v < 0.35 { 0.0 } else { (v * 1000.0).round() / 1000.0 };
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    fs::write(&path, text).unwrap();
    let out = dir.path().join("sweep.json");
    let counts = dir.path().join("counts.csv");
    let o = qbg(&[
        "sweep",
        s(&path),
        "--chi-min",
        "-2.0",
        "--chi-max",
        "0.3",
        "--steps",
        "24",
        "--out",
        s(&out),
        "--counts",
        s(&counts),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let record = fs::read_to_string(&out).unwrap();
    assert!(!record.contains("\"error\""), "some grid point failed");
    let rows = fs::read_to_string(&counts).unwrap();
    assert_eq!(rows.lines().count(), 25);
    assert!(rows.lines().skip(1).all(|l| !l.ends_with(",,")));
}
