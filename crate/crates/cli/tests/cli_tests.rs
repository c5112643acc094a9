use std::path::PathBuf;
use std::process::{Command, Output};

use qtraj_cli::{run, Report, RunOptions, Scenario, Task};

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn scenario_path(name: &str) -> PathBuf {
    manifest().join("scenarios").join(format!("{name}.scn"))
}

fn qtraj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtraj")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(name: &str) -> Report {
    run(&Scenario::load(&scenario_path(name)).unwrap(), &RunOptions::default())
}

#[test]
fn golden_coupled_report() {
    let golden = manifest().join("tests/golden/coupled2.json");
    let json = report("coupled2").to_json();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &json).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden file present; set UPDATE_GOLDEN=1 to create");
    assert!(json == expected, "report differs from {}", golden.display());

    let path = scenario_path("coupled2");
    let out = qtraj(&["run", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out) == expected);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let path = scenario_path("x2p2");
    let args = ["run", path.to_str().unwrap(), "--format", "json"];
    let single = Command::new(env!("CARGO_BIN_EXE_qtraj"))
        .args(args)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_qtraj"))
        .args(args)
        .env("RAYON_NUM_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(single.stdout, many.stdout);
    assert_eq!(single.stdout, qtraj(&args).stdout);
}

#[test]
fn json_report_round_trips() {
    let r = report("x2p2");
    let back: Report = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json(), r.to_json());
}

#[test]
fn builtin_scenarios_pass() {
    for name in ["harmonic", "coupled2", "x2p2"] {
        let r = report(name);
        assert!(r.passed, "{}", r.to_text());
        for task in &r.tasks {
            for e in task.entries.iter().filter(|e| e.required) {
                assert!(e.residual.as_ref().unwrap().is_zero());
            }
        }
    }
}

#[test]
fn quartic_scenario_reports_classical_bracket() {
    let r = report("x2p2");
    let canon = r.tasks.iter().find(|t| t.task == Task::Canonicity).unwrap();
    let quantum = canon.entries.iter().find(|e| e.label == "[[Q,P]]").unwrap();
    assert_eq!(quantum.value.to_string(), "1");
    let classical = canon.entries.iter().find(|e| e.label == "{Q,P}").unwrap();
    assert_eq!(classical.value.to_string(), "1 + 2*h^2*t^2");
    let compose = r.tasks.iter().find(|t| t.task == Task::Compose).unwrap();
    assert!(compose.passed);
    assert_eq!(compose.notes["t1_order"], "3");
}

#[test]
fn star_of_coordinates() {
    let out = qtraj(&["star", "x", "p"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "x*p + 1/2*i*h\n");
    let out = qtraj(&["star", "p1", "x1*x2", "--hbar-order", "1"]);
    assert_eq!(stdout(&out), "x1*x2*p1 - 1/2*i*h*x2\n");
}

#[test]
fn evolve_harmonic_position() {
    let out = qtraj(&["evolve", "--builtin", "harmonic", "--observable", "x", "--t-order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("  x(t) = x + t*p - 1/2*t^2*x - 1/6*t^3*p\n"), "{}", stdout(&out));
}

#[test]
fn solver_from_the_command_line() {
    let out = qtraj(&["solve-s", "--builtin", "x2p2", "--hbar-order", "2", "--t-order", "6", "--coeff-degree", "5", "--degree", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("solved S = reference S: 15 cases, 0 failed"));
}

#[test]
fn failed_checks_exit_with_one() {
    let out = qtraj(&["verify-s", "--builtin", "x2p2", "--hbar-order", "2", "--t-order", "4", "--degree", "3", "--s-operator", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL] verify-s"));
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    let out = qtraj(&["star", "x + * p", "p"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 4"));
    assert_eq!(qtraj(&["run", "no/such/file.scn"]).status.code(), Some(2));
    assert_eq!(qtraj(&["flow"]).status.code(), Some(2));
    assert_eq!(qtraj(&["flow", "--builtin", "quartic"]).status.code(), Some(2));
    assert_eq!(qtraj(&["verify-s", "--builtin", "x2p2", "--hbar-order", "1"]).status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("qtraj-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("flow.json");
    let out = qtraj(&["flow", "--builtin", "coupled2", "--const", "k=-2", "--t-order", "4", "--format", "json", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&file).unwrap(), stdout(&out));
    let r: Report = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r.scenario.constants.k.to_string(), "-2");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn timing_only_when_requested() {
    let path = scenario_path("harmonic");
    let plain = stdout(&qtraj(&["run", path.to_str().unwrap(), "--format", "json", "--t-order", "4"]));
    assert!(!plain.contains("wall_ms"));
    let timed = stdout(&qtraj(&["run", path.to_str().unwrap(), "--format", "json", "--t-order", "4", "--timing"]));
    assert!(timed.contains("wall_ms"));
}
