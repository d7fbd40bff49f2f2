//! End-to-end tests of the command-line interface and its exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_firebreak");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

const SMALL: &str = r#"{
    "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 20, "risk_threshold": 5}],
    "units": [
        {"id": "1", "patches": [{"id": "p1", "veg": "1", "area": 10.0, "initial_age": 6}]},
        {"id": "2", "patches": [{"id": "p2", "veg": "1", "area": 10.0, "initial_age": 6}]},
        {"id": "3", "patches": [{"id": "p3", "veg": "1", "area": 10.0, "initial_age": 6}]}
    ],
    "edges": [{"i": "1", "j": "2"}, {"i": "2", "j": "3"}],
    "params": {"T": 2, "rho": 0.34, "H": 0.5}
}"#;

fn write_small(dir: &Path) -> PathBuf {
    let path = dir.join("small.json");
    std::fs::write(&path, SMALL).unwrap();
    path
}

#[test]
fn validate_reports_instance_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());
    let out = run(&["validate", inst.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("instance ok"));
    assert!(text.contains("units: 3 (3 treatable)"));
    assert!(text.contains("edges: 2"));
}

#[test]
fn usage_errors_exit_64() {
    let out = run(&["solve", "--definitely-not-a-flag"]);
    assert_eq!(code(&out), 64);
    let out = run(&["no-such-command"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn missing_instance_file_exits_3() {
    let out = run(&["validate", "/nonexistent/instance.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn invalid_instance_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn solve_finds_the_chain_break() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());
    let report_dir = dir.path().join("report");
    let out = run(&[
        "solve",
        inst.to_str().unwrap(),
        "--solver",
        "exhaustive",
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("status: Optimal"));
    assert!(text.contains("objective: 0"));
    let csv = std::fs::read_to_string(report_dir.join("schedule.csv")).unwrap();
    assert!(csv.starts_with("unit_id,t\n"));
    assert!(csv.contains("2,1"));
    assert!(std::fs::read_to_string(report_dir.join("series.csv"))
        .unwrap()
        .starts_with("t,connectivity,weighted,treated_area\n"));
}

#[test]
fn infeasible_instance_exits_2() {
    // a forced treatment that cannot fit any budget
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stuck.json");
    std::fs::write(
        &path,
        r#"{
        "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
        "units": [
            {"id": "a", "patches": [{"id": "pa", "veg": "1", "area": 10.0, "initial_age": 10}]},
            {"id": "b", "patches": [{"id": "pb", "veg": "1", "area": 100.0, "initial_age": 1}]}
        ],
        "params": {"T": 1, "rho": 0.05, "H": 0.5}
    }"#,
    )
    .unwrap();
    let out = run(&["solve", path.to_str().unwrap(), "--solver", "exhaustive"]);
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn simulate_flags_an_illegal_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());
    let sched = dir.path().join("sched.csv");
    // treating units 1 and 2 in the same year breaks the budget (20 > 10.2)
    std::fs::write(&sched, "unit_id,t\n1,1\n2,1\n").unwrap();
    let out = run(&["simulate", inst.to_str().unwrap(), "--schedule", sched.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{out:?}");
    assert!(stdout(&out).contains("feasible: false"));
}

#[test]
fn simulate_writes_state_tables() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());
    let sched = dir.path().join("sched.csv");
    std::fs::write(&sched, "unit_id,t\n2,1\n").unwrap();
    let out_dir = dir.path().join("state");
    let out = run(&[
        "simulate",
        inst.to_str().unwrap(),
        "--schedule",
        sched.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("feasible: true"));
    let patches = std::fs::read_to_string(out_dir.join("patches.csv")).unwrap();
    assert!(patches.starts_with("patch_id,t,age,risk_patch,young,old\n"));
    assert!(std::fs::read_to_string(out_dir.join("units.csv"))
        .unwrap()
        .starts_with("unit_id,t,risk_unit\n"));
}

#[test]
fn build_then_check_round_trips_through_a_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());

    let lp = dir.path().join("model.lp");
    let out = run(&["build", inst.to_str().unwrap(), "--out", lp.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(std::fs::read_to_string(&lp).unwrap().starts_with("\\ model phase2"));

    // a complete solution file from the library's own lift of a legal plan
    let ls = firebreak::landscape::parse_landscape(SMALL).unwrap();
    let model = firebreak::mip::build_phase2(&ls, true).unwrap();
    let sched =
        firebreak::dynamics::Schedule::new(&ls, vec![("2".to_string(), 1)]).unwrap();
    let a = firebreak::mip::lift_assignment(&ls, &sched, &model, ls.horizon()).unwrap();
    let mut csv = String::from("name,value\n");
    for (name, value) in &a {
        csv.push_str(&format!("{name},{value}\n"));
    }
    let sol = dir.path().join("solution.csv");
    std::fs::write(&sol, &csv).unwrap();

    let out = run(&["check", inst.to_str().unwrap(), "--solution", sol.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("model rows satisfied: true"));
    assert!(text.contains("objective: 0"));
    assert!(text.contains("year 1: unit 2"));

    // checking against the emitted LP file gives the same verdict
    let out = run(&[
        "check",
        inst.to_str().unwrap(),
        "--model",
        lp.to_str().unwrap(),
        "--solution",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("model rows satisfied: true"));

    // tamper with an age value: the checker must reject it
    let bad = csv.replace("A_p2_1,0", "A_p2_1,7");
    assert_ne!(bad, csv);
    std::fs::write(&sol, bad).unwrap();
    let out = run(&["check", inst.to_str().unwrap(), "--solution", sol.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{out:?}");
    assert!(stdout(&out).contains("model rows satisfied: false"));
}

#[test]
fn phase2_writes_a_report_directory() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());
    let report = dir.path().join("report");
    let out = run(&[
        "phase2",
        inst.to_str().unwrap(),
        "--solver",
        "exhaustive",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    for f in ["schedule.csv", "series.csv", "summary.txt"] {
        assert!(report.join(f).exists(), "{f} missing");
    }
}

#[test]
fn phase1_reports_preparatory_periods() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("backlog.json");
    std::fs::write(
        &path,
        r#"{
        "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
        "units": [
            {"id": "1", "patches": [{"id": "p1", "veg": "1", "area": 10.0, "initial_age": 11}]},
            {"id": "2", "patches": [{"id": "p2", "veg": "1", "area": 10.0, "initial_age": 4}]}
        ],
        "edges": [{"i": "1", "j": "2"}],
        "params": {"T": 3, "rho": 0.5, "H": 0.5}
    }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("p1");
    let out = run(&[
        "phase1",
        path.to_str().unwrap(),
        "--solver",
        "exhaustive",
        "--stop",
        "old_below=0.05",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("preparatory periods: 1"));
    assert!(out_dir.join("schedule.csv").exists());
    let aged = out_dir.join("aged_instance.json");
    assert!(aged.exists());
    // the aged instance is itself a valid input
    let out = run(&["validate", aged.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
}

#[test]
fn compare_tabulates_budget_levels() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());
    let out = run(&[
        "compare",
        inst.to_str().unwrap(),
        "--solver",
        "exhaustive",
        "--levels",
        "0.1,0.34",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert!(text.starts_with("rho,status,objective"));
    assert!(text.contains("0.34,Optimal,0"));
}

#[test]
fn generate_emits_a_valid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("synthetic.json");
    let out = run(&[
        "generate",
        "--units",
        "12",
        "--seed",
        "5",
        "--old-frac",
        "0.3",
        "--out",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let out = run(&["validate", inst.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("units: 12"));
}

#[test]
fn overrides_change_the_loaded_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_small(dir.path());
    let out = run(&["validate", inst.to_str().unwrap(), "--rho", "0.5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("budget cap per period: 15"));
    // an out-of-range override is a validation error
    let out = run(&["validate", inst.to_str().unwrap(), "--rho", "1.5"]);
    assert_eq!(code(&out), 1);
}
