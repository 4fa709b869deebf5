//! Experiment sweeps over flexible ratio, regime, renewables and seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_simulation, RunMetrics};
use crate::error::{Error, Result};
use crate::scenario::{Regime, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub ratios: Vec<f64>,
    pub regimes: Vec<Regime>,
    /// Renewable settings to run; `true` adds the renewable producer.
    pub renewable: Vec<bool>,
    /// Seeds per cell: `base.seed`, `base.seed + 1`, ...
    pub seeds: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let empty = |key: &str| Err(Error::validation(key, "must not be empty"));
        if self.ratios.is_empty() {
            return empty("ratios");
        }
        if self.regimes.is_empty() {
            return empty("regimes");
        }
        if self.renewable.is_empty() {
            return empty("renewable");
        }
        if self.seeds == 0 {
            return Err(Error::validation("seeds", "must be at least 1"));
        }
        for (i, r) in self.ratios.iter().enumerate() {
            if !(0.0..=1.0).contains(r) {
                return Err(Error::validation(
                    format!("ratios[{i}]"),
                    "must be in [0, 1]",
                ));
            }
        }
        Ok(())
    }

    /// Cells in output order: ratio, regime, renewable, seed.
    pub fn cells(&self, base_seed: u64) -> Vec<SweepCell> {
        let mut cells = Vec::new();
        for &ratio in &self.ratios {
            for &regime in &self.regimes {
                for &renewable in &self.renewable {
                    for k in 0..self.seeds {
                        cells.push(SweepCell {
                            ratio,
                            regime,
                            renewable,
                            seed: base_seed.wrapping_add(k as u64),
                        });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub ratio: f64,
    pub regime: Regime,
    pub renewable: bool,
    pub seed: u64,
}

impl SweepCell {
    /// The base scenario with this cell's knobs applied.
    pub fn scenario(&self, base: &Scenario) -> Scenario {
        let mut s = base.clone();
        s.flexible_ratio = self.ratio;
        s.regime = self.regime;
        s.seed = self.seed;
        s.renewable = if self.renewable {
            Some(base.renewable.clone().unwrap_or_default())
        } else {
            None
        };
        s
    }

    pub fn run(&self, base: &Scenario) -> SweepRow {
        let outcome = run_simulation(&self.scenario(base), self.seed);
        SweepRow {
            cell: *self,
            metrics: outcome.as_ref().ok().map(|r| r.metrics),
            error: outcome.err().map(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub metrics: Option<RunMetrics>,
    pub error: Option<String>,
}

/// Seed average of one (ratio, regime, renewable) cell over its
/// successful runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeanRow {
    pub ratio: f64,
    pub regime: Regime,
    pub renewable: bool,
    pub runs: usize,
    pub failed: usize,
    pub combined: f64,
    pub usage: f64,
    pub balancing: f64,
    pub balancing_energy_mwh: f64,
    pub mean_spot: f64,
    /// Mean over runs where both user groups exist.
    pub group_advantage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub means: Vec<SweepMeanRow>,
}

impl SweepSummary {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }

    pub fn mean(&self, ratio: f64, regime: Regime, renewable: bool) -> Option<&SweepMeanRow> {
        self.means
            .iter()
            .find(|m| m.ratio == ratio && m.regime == regime && m.renewable == renewable)
    }
}

/// Runs every cell, concurrently where threads are available. A failing
/// cell is recorded in its row and does not stop the others.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec) -> Result<SweepSummary> {
    base.validate()?;
    spec.validate()?;
    let cells = spec.cells(base.seed);
    let rows: Vec<SweepRow> = cells.par_iter().map(|c| c.run(base)).collect();
    let means = seed_means(&rows, spec.seeds);
    Ok(SweepSummary { rows, means })
}

/// Same as [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(
    base: &Scenario,
    spec: &SweepSpec,
    threads: usize,
) -> Result<SweepSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(base, spec))
}

fn seed_means(rows: &[SweepRow], seeds: usize) -> Vec<SweepMeanRow> {
    rows.chunks(seeds)
        .map(|group| {
            let cell = group[0].cell;
            let ok: Vec<&RunMetrics> = group.iter().filter_map(|r| r.metrics.as_ref()).collect();
            let n = ok.len().max(1) as f64;
            let avg = |f: &dyn Fn(&RunMetrics) -> f64| ok.iter().map(|m| f(m)).sum::<f64>() / n;
            let advantages: Vec<f64> = ok.iter().filter_map(|m| m.group_advantage).collect();
            SweepMeanRow {
                ratio: cell.ratio,
                regime: cell.regime,
                renewable: cell.renewable,
                runs: ok.len(),
                failed: group.len() - ok.len(),
                combined: avg(&|m| m.costs.combined),
                usage: avg(&|m| m.costs.usage),
                balancing: avg(&|m| m.costs.balancing),
                balancing_energy_mwh: avg(&|m| m.balancing_energy_mwh),
                mean_spot: avg(&|m| m.mean_spot),
                group_advantage: (!advantages.is_empty())
                    .then(|| advantages.iter().sum::<f64>() / advantages.len() as f64),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_are_ordered_ratio_regime_renewable_seed() {
        let spec = SweepSpec {
            ratios: vec![0.0, 0.5],
            regimes: vec![Regime::Rtp, Regime::Integrated],
            renewable: vec![false],
            seeds: 2,
        };
        let cells = spec.cells(7);
        assert_eq!(cells.len(), 8);
        assert_eq!(
            (cells[0].ratio, cells[0].regime, cells[0].seed),
            (0.0, Regime::Rtp, 7)
        );
        assert_eq!(cells[1].seed, 8);
        assert_eq!(cells[2].regime, Regime::Integrated);
        assert_eq!(cells[4].ratio, 0.5);
    }

    #[test]
    fn empty_axes_rejected() {
        let spec = SweepSpec {
            ratios: vec![],
            regimes: vec![Regime::Rtp],
            renewable: vec![false],
            seeds: 1,
        };
        assert!(matches!(spec.validate(), Err(Error::Validation { key, .. }) if key == "ratios"));
    }
}
