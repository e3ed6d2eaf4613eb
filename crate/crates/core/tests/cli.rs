use std::fs;
use std::io::BufReader;
use std::process::{Command, Output};

mod common;

use common::factorial_power;

use pilot_core::harness::{read_records_csv, CdfPoint, RunStatus};
use pilot_core::solvers::solve_expa;
use pilot_core::{FadingTensor, PilotAssignment, Scenario};

fn pilot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pilot"))
        .args(args)
        .output()
        .expect("spawn pilot")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn solve_expa_matches_library() {
    let out = stdout(&pilot(&["solve", "--solver", "expa", "--cells", "2", "--users", "3", "--seed", "7"]));
    let beta = Scenario::new(2, 3, 128, 7).realize().unwrap().beta;
    let lib = solve_expa(&beta, 1_000_000).unwrap();

    let printed: f64 = field(&out, "objective").parse().unwrap();
    assert!((printed - lib.best_objective).abs() <= 1e-9 * lib.best_objective.abs());
    let csv: String = out.lines().filter(|l| l.chars().all(|c| c.is_ascii_digit() || c == ',')).map(|l| format!("{l}\n")).collect();
    assert_eq!(PilotAssignment::read_csv(csv.as_bytes()).unwrap(), lib.best);
}

#[test]
fn solve_is_seed_deterministic() {
    let args = ["solve", "--solver", "skga", "--cells", "3", "--users", "4", "--pop", "20", "--gens", "4", "--clusters", "2", "--seed", "11"];
    let strip = |s: String| s.lines().filter(|l| !l.starts_with("wall_time")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(stdout(&pilot(&args))), strip(stdout(&pilot(&args))));
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    stdout(&pilot(&["solve", "--solver", "ga", "--cells", "2", "--users", "3", "--pop", "10", "--gens", "3",
        "--out", out_dir.to_str().unwrap()]));
    let history = fs::read_to_string(out_dir.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 4);
    let se = fs::read_to_string(out_dir.join("se.csv")).unwrap();
    assert!(se.starts_with("cell,pilot,user,se\n"));
    assert!(out_dir.join("assignment.csv").exists());
}

#[test]
fn space_prints_exact_count() {
    let out = stdout(&pilot(&["space", "--cells", "16", "--users", "60"]));
    assert_eq!(out.trim(), factorial_power(60, 15).to_string());
    let out = stdout(&pilot(&["space", "--cells", "3", "--users", "4"]));
    assert_eq!(out.trim(), "576");
}

#[test]
fn invalid_config_exits_nonzero() {
    for args in [
        &["solve", "--pop", "0"][..],
        &["solve", "--cells", "0"],
        &["solve", "--pm", "1.5"],
        &["solve", "--solver", "pkga", "--parallelism", "0", "--cells", "2", "--users", "2"],
        &["solve", "--solver", "nope"],
        &["solve", "--solver", "expa", "--cells", "4", "--users", "8"],
        &["space", "--cells", "0", "--users", "3"],
        &["bench", "--spec", "/nonexistent/spec.json", "--out", "/tmp/x"],
    ] {
        let out = pilot(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn gen_writes_scenario_and_fading() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    stdout(&pilot(&["gen", "--cells", "3", "--users", "4", "--antennas", "32", "--seed", "5", "--out", out.to_str().unwrap()]));
    let scenario: Scenario = serde_json::from_str(&fs::read_to_string(out.join("scenario.json")).unwrap()).unwrap();
    assert_eq!(scenario, Scenario::new(3, 4, 32, 5));
    let beta = FadingTensor::read_csv(BufReader::new(fs::File::open(out.join("fading.csv")).unwrap())).unwrap();
    assert_eq!(beta, scenario.realize().unwrap().beta);
}

#[test]
fn bench_and_cdf_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(
        &spec_path,
        r#"{
            "scenario": {"L": 2, "K": 3, "M": 64},
            "solvers": [
                {"solver": "rpa"},
                {"solver": "expa", "expa_limit": 10},
                {"solver": "skga", "config": {"population_size": 12, "generations": 3, "cluster_count": 2}}
            ],
            "seeds": [1, 2, 3],
            "sweep": {"K": [3, 4]}
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("results");
    stdout(&pilot(&["bench", "--spec", spec_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]));

    let records = read_records_csv(fs::File::open(out_dir.join("records.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 3 * 3 * 2);
    // 3!^1 = 6 fits the limit of 10, 4!^1 = 24 does not
    for r in records.iter().filter(|r| r.solver_name == "expa") {
        assert_eq!(r.status == RunStatus::Ok, r.users == 3);
    }

    let scaling = fs::read_to_string(out_dir.join("scaling.csv")).unwrap();
    let mut lines = scaling.lines();
    assert_eq!(lines.next(), Some("solver,M,K,median_wall_time,median_evaluations"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 + 1 + 2);
    assert_eq!(rows.iter().filter(|l| l.starts_with("expa,")).count(), 1);

    let cdf_file = fs::read_to_string(out_dir.join("cdf.csv")).unwrap();
    let cdf_cli = stdout(&pilot(&["cdf", out_dir.join("records.csv").to_str().unwrap()]));
    let parse = |s: &str| -> Vec<CdfPoint> { csv::Reader::from_reader(s.as_bytes()).deserialize().map(|r| r.unwrap()).collect() };
    let from_cli = parse(&cdf_cli);
    assert_eq!(from_cli.len(), 6 + 3 + 6);
    assert_eq!(parse(&cdf_file), from_cli);
    for solver in ["rpa", "expa", "skga"] {
        let levels: Vec<f64> = from_cli.iter().filter(|p| p.solver == solver).map(|p| p.cdf).collect();
        assert!(levels.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*levels.last().unwrap(), 1.0);
    }
}
