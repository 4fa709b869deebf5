//! Scenario files, sweeps and result files.

pub mod output;
pub mod scenario_file;
pub mod sweep;

pub use output::{write_outputs, write_sweep_outputs};
pub use scenario_file::{load_scenario, parse_scenario, scenario_to_toml};
pub use sweep::{run_sweep, SweepCell, SweepMeanRow, SweepRow, SweepSpec, SweepSummary};

/// Overrides the output directory when no `--out` flag is given.
pub const ENV_OUT_DIR: &str = "FLEXMARKET_OUT_DIR";
/// Worker threads for sweeps.
pub const ENV_THREADS: &str = "FLEXMARKET_THREADS";
