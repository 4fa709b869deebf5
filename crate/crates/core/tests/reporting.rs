use std::fs;
use std::path::Path;
use std::process::Command;

use flexmarket::engine::Simulation;
use flexmarket::report::output::read_costs;
use flexmarket::report::{load_scenario, run_sweep, write_outputs, write_sweep_outputs, SweepSpec};
use flexmarket::settlement::cost_metrics_from_groups;
use flexmarket::{run_simulation, Regime, Scenario};

fn scenarios_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn small() -> Scenario {
    let mut s = Scenario::desk();
    s.utilities.truncate(2);
    for u in &mut s.utilities {
        u.users = 10;
        u.mean_load *= 50.0;
        u.amplitude *= 50.0;
    }
    s.n_days = 3;
    s.warmup_days = 1;
    s.flexible_ratio = 0.5;
    s.anneal.iterations = 200;
    s
}

fn data_rows(path: &Path) -> usize {
    let text = fs::read_to_string(path).unwrap();
    text.lines().count() - 1
}

#[test]
fn row_counts_match_records() {
    let mut s = small();
    s.renewable = Some(Default::default());
    let report = run_simulation(&s, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&report, dir.path()).unwrap();
    let days = report.days.len();
    assert_eq!(data_rows(&dir.path().join("prices.csv")), days * 24);
    assert_eq!(data_rows(&dir.path().join("demand.csv")), days * 1440);
    let activations: usize = report
        .days
        .iter()
        .map(|d| d.balancing.activations.len())
        .sum();
    assert_eq!(data_rows(&dir.path().join("balancing.csv")), activations);
    assert_eq!(data_rows(&dir.path().join("costs.csv")), days * 2);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seed"], 1);
    assert_eq!(summary["scenario_hash"], report.scenario_hash.as_str());
    assert_eq!(summary["scenario_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn zero_day_report_writes_headers_only() {
    let report = Simulation::new(&small(), 1).unwrap().finish(Vec::new());
    let dir = tempfile::tempdir().unwrap();
    let written = write_outputs(&report, dir.path()).unwrap();
    assert_eq!(written.len(), 5);
    for name in ["prices.csv", "demand.csv", "balancing.csv", "costs.csv"] {
        assert_eq!(data_rows(&dir.path().join(name)), 0, "{name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["days"], 0);
}

#[test]
fn costs_file_reproduces_metrics() {
    let s = small();
    let report = run_simulation(&s, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&report, dir.path()).unwrap();
    let rows: Vec<_> = read_costs(dir.path().join("costs.csv"))
        .unwrap()
        .into_iter()
        .filter(|r| r.day >= s.warmup_days)
        .collect();
    assert_eq!(cost_metrics_from_groups(&rows), report.metrics.costs);
    let energy: f64 = rows.iter().map(|r| r.energy_mwh).sum();
    assert_eq!(energy, report.metrics.energy_mwh);
}

#[test]
fn single_cell_sweep_equals_direct_run() {
    let mut base = small();
    base.seed = 11;
    let spec = SweepSpec {
        ratios: vec![0.5],
        regimes: vec![Regime::Rtp],
        renewable: vec![false],
        seeds: 1,
    };
    let summary = run_sweep(&base, &spec).unwrap();
    assert_eq!(summary.rows.len(), 1);
    let direct = run_simulation(&base, 11).unwrap();
    assert_eq!(summary.rows[0].metrics, Some(direct.metrics));
    let mean = summary.mean(0.5, Regime::Rtp, false).unwrap();
    assert_eq!(mean.combined, direct.metrics.costs.combined);
}

#[test]
fn cells_do_not_depend_on_order() {
    let base = small();
    let spec = SweepSpec {
        ratios: vec![0.0, 0.6],
        regimes: vec![Regime::Rtp, Regime::Integrated],
        renewable: vec![false],
        seeds: 2,
    };
    let summary = run_sweep(&base, &spec).unwrap();
    let mut cells = spec.cells(base.seed);
    cells.reverse();
    for cell in cells {
        let row = summary.rows.iter().find(|r| r.cell == cell).unwrap();
        assert_eq!(&cell.run(&base), row);
    }
}

#[test]
fn sweep_files_have_one_row_per_run_and_cell() {
    let base = small();
    let spec = SweepSpec {
        ratios: vec![0.0, 0.3],
        regimes: vec![Regime::Integrated],
        renewable: vec![false, true],
        seeds: 2,
    };
    let summary = run_sweep(&base, &spec).unwrap();
    assert!(summary.all_ok());
    let dir = tempfile::tempdir().unwrap();
    write_sweep_outputs(&base, &spec, &summary, dir.path()).unwrap();
    assert_eq!(data_rows(&dir.path().join("sweep.csv")), 8);
    assert_eq!(data_rows(&dir.path().join("sweep_mean.csv")), 4);
}

#[test]
fn invalid_sweeps_are_rejected() {
    let base = small();
    let spec = SweepSpec {
        ratios: vec![1.2],
        regimes: vec![Regime::Rtp],
        renewable: vec![false],
        seeds: 1,
    };
    assert!(run_sweep(&base, &spec).is_err());
    let spec = SweepSpec {
        ratios: vec![0.1],
        regimes: vec![],
        renewable: vec![false],
        seeds: 1,
    };
    assert!(run_sweep(&base, &spec).is_err());
}

#[test]
fn shipped_scenarios_match_builtins() {
    let dir = scenarios_dir();
    assert_eq!(
        load_scenario(dir.join("desk.toml")).unwrap(),
        Scenario::desk()
    );
    assert_eq!(
        load_scenario(dir.join("appliances.toml")).unwrap(),
        Scenario::desk_appliances()
    );
    let renewable = load_scenario(dir.join("renewable.toml")).unwrap();
    assert!(renewable.renewable.is_some());
    assert_eq!(
        Scenario {
            renewable: None,
            ..renewable
        },
        Scenario::desk()
    );
}

fn write_small_scenario(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.toml");
    fs::write(
        &path,
        flexmarket::report::scenario_to_toml(&small()).unwrap(),
    )
    .unwrap();
    path
}

#[test]
fn cli_simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_small_scenario(dir.path());
    let out = dir.path().join("run");
    let status = Command::new(env!("CARGO_BIN_EXE_flexmarket"))
        .args(["simulate", "--scenario"])
        .arg(&scenario)
        .args([
            "--days",
            "2",
            "--seed",
            "4",
            "--regime",
            "exg",
            "--flex-ratio",
            "0.4",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    assert_eq!(data_rows(&out.join("prices.csv")), 48);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 4);
    assert_eq!(summary["sweep"][0]["regime"], "exg");
    assert_eq!(summary["sweep"][0]["ratio"], 0.4);
}

#[test]
fn cli_out_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_small_scenario(dir.path());
    let out = dir.path().join("env_out");
    let status = Command::new(env!("CARGO_BIN_EXE_flexmarket"))
        .args(["simulate", "--days", "1", "--scenario"])
        .arg(&scenario)
        .env("FLEXMARKET_OUT_DIR", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("costs.csv").exists());
}

#[test]
fn cli_sweep_writes_means() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_small_scenario(dir.path());
    let out = dir.path().join("sweep");
    let status = Command::new(env!("CARGO_BIN_EXE_flexmarket"))
        .args([
            "sweep",
            "--ratios",
            "0,0.5",
            "--regimes",
            "rtp",
            "--seeds",
            "2",
            "--days",
            "2",
            "--scenario",
        ])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .env("FLEXMARKET_THREADS", "1")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(data_rows(&out.join("sweep.csv")), 4);
    assert_eq!(data_rows(&out.join("sweep_mean.csv")), 2);
}

#[test]
fn cli_reports_bad_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "flexible_ratio = 1.4\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_flexmarket"))
        .args(["simulate", "--scenario"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("never"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("flexible_ratio"));
}
