//! CSV and JSON result files.
//!
//! All CSVs carry a header row, use `,` as delimiter and `.` as decimal
//! separator. Floats are written in Rust's shortest round-trip form, so
//! reading a file back reproduces the in-memory values exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::engine::{scenario_hash, RunMetrics, SimulationReport};
use crate::error::Result;
use crate::scenario::Scenario;
use crate::settlement::GroupDayCost;

use super::sweep::{SweepMeanRow, SweepRow, SweepSpec, SweepSummary};

pub const PRICES_HEADER: [&str; 4] = ["day", "hour", "spot", "imbalance"];
pub const DEMAND_HEADER: [&str; 4] = ["day", "minute", "forecast", "realized"];
pub const BALANCING_HEADER: [&str; 5] = ["day", "slot", "direction", "energy", "price"];
pub const COSTS_HEADER: [&str; 6] = [
    "day",
    "group",
    "users",
    "energy_mwh",
    "usage_eur",
    "balancing_eur",
];
pub const SWEEP_HEADER: [&str; 12] = [
    "ratio",
    "regime",
    "renewable",
    "seed",
    "status",
    "combined",
    "usage",
    "balancing",
    "balancing_energy_mwh",
    "mean_spot",
    "group_advantage",
    "error",
];
pub const SWEEP_MEAN_HEADER: [&str; 11] = [
    "ratio",
    "regime",
    "renewable",
    "runs",
    "failed",
    "combined",
    "usage",
    "balancing",
    "balancing_energy_mwh",
    "mean_spot",
    "group_advantage",
];

fn writer(dir: &Path, name: &str, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    Ok(w)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Summary of a single run.
#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    seed: u64,
    scenario_hash: &'a str,
    days: usize,
    metrics: &'a RunMetrics,
    sweep: Vec<RunSweepRow<'a>>,
}

#[derive(Debug, Serialize)]
struct RunSweepRow<'a> {
    ratio: f64,
    regime: &'a str,
    renewable: bool,
    seed: u64,
    metrics: &'a RunMetrics,
}

/// Writes prices.csv, demand.csv, balancing.csv, costs.csv and
/// summary.json for one run. Returns the written paths.
pub fn write_outputs(report: &SimulationReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut prices = writer(dir, "prices.csv", &PRICES_HEADER)?;
    let mut demand = writer(dir, "demand.csv", &DEMAND_HEADER)?;
    let mut balancing = writer(dir, "balancing.csv", &BALANCING_HEADER)?;
    let mut costs = writer(dir, "costs.csv", &COSTS_HEADER)?;
    for d in &report.days {
        let day = d.day.to_string();
        for h in 0..d.spot_prices.len() {
            prices.write_record([
                day.clone(),
                h.to_string(),
                d.spot_prices[h].to_string(),
                d.imbalance_prices[h].to_string(),
            ])?;
        }
        for (m, (f, r)) in d.forecast_demand.iter().zip(&d.realized_demand).enumerate() {
            demand.write_record([day.clone(), m.to_string(), f.to_string(), r.to_string()])?;
        }
        for a in &d.balancing.activations {
            balancing.write_record([
                day.clone(),
                a.slot.to_string(),
                a.direction.as_str().to_string(),
                a.energy.to_string(),
                a.price.to_string(),
            ])?;
        }
        for c in &d.group_costs {
            costs.write_record([
                day.clone(),
                c.group.as_str().to_string(),
                c.users.to_string(),
                c.energy_mwh.to_string(),
                c.usage_eur.to_string(),
                c.balancing_eur.to_string(),
            ])?;
        }
    }
    for mut w in [prices, demand, balancing, costs] {
        w.flush()?;
    }

    let s = &report.scenario;
    let summary = RunSummary {
        seed: report.seed,
        scenario_hash: &report.scenario_hash,
        days: report.days.len(),
        metrics: &report.metrics,
        sweep: vec![RunSweepRow {
            ratio: s.flexible_ratio,
            regime: s.regime.as_str(),
            renewable: s.renewable.is_some(),
            seed: report.seed,
            metrics: &report.metrics,
        }],
    };
    let summary_path = dir.join("summary.json");
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;

    Ok([
        "prices.csv",
        "demand.csv",
        "balancing.csv",
        "costs.csv",
        "summary.json",
    ]
    .iter()
    .map(|n| dir.join(n))
    .collect())
}

#[derive(Debug, Serialize)]
struct SweepFile<'a> {
    seed: u64,
    scenario_hash: String,
    spec: &'a SweepSpec,
    rows: &'a [SweepRow],
    means: &'a [SweepMeanRow],
}

/// Writes sweep.csv (one row per run), sweep_mean.csv (seed averages)
/// and summary.json.
pub fn write_sweep_outputs(
    base: &Scenario,
    spec: &SweepSpec,
    summary: &SweepSummary,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut rows = writer(dir, "sweep.csv", &SWEEP_HEADER)?;
    for r in &summary.rows {
        let c = &r.cell;
        let m = r.metrics.as_ref();
        rows.write_record([
            c.ratio.to_string(),
            c.regime.as_str().to_string(),
            c.renewable.to_string(),
            c.seed.to_string(),
            if r.error.is_none() { "ok" } else { "error" }.to_string(),
            opt(m.map(|m| m.costs.combined)),
            opt(m.map(|m| m.costs.usage)),
            opt(m.map(|m| m.costs.balancing)),
            opt(m.map(|m| m.balancing_energy_mwh)),
            opt(m.map(|m| m.mean_spot)),
            opt(m.and_then(|m| m.group_advantage)),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    rows.flush()?;

    let mut means = writer(dir, "sweep_mean.csv", &SWEEP_MEAN_HEADER)?;
    for m in &summary.means {
        means.write_record([
            m.ratio.to_string(),
            m.regime.as_str().to_string(),
            m.renewable.to_string(),
            m.runs.to_string(),
            m.failed.to_string(),
            m.combined.to_string(),
            m.usage.to_string(),
            m.balancing.to_string(),
            m.balancing_energy_mwh.to_string(),
            m.mean_spot.to_string(),
            opt(m.group_advantage),
        ])?;
    }
    means.flush()?;

    let file = SweepFile {
        seed: base.seed,
        scenario_hash: scenario_hash(base),
        spec,
        rows: &summary.rows,
        means: &summary.means,
    };
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&file)? + "\n",
    )?;

    Ok(["sweep.csv", "sweep_mean.csv", "summary.json"]
        .iter()
        .map(|n| dir.join(n))
        .collect())
}

/// Reads costs.csv back.
pub fn read_costs(path: impl AsRef<Path>) -> Result<Vec<GroupDayCost>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
