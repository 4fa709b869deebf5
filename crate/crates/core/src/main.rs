use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use flexmarket::report::sweep::run_sweep_with_threads;
use flexmarket::report::{
    load_scenario, run_sweep, write_outputs, write_sweep_outputs, SweepSpec, ENV_OUT_DIR,
    ENV_THREADS,
};
use flexmarket::{run_simulation, Regime, Scenario};

#[derive(Parser)]
#[command(
    name = "flexmarket",
    version,
    about = "Day-ahead, balancing and settlement simulator for flexible demand"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write prices, demand, balancing and cost files.
    Simulate {
        /// Scenario file; the built-in desk scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Simulated days, warm-up included.
        #[arg(long)]
        days: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_regime)]
        regime: Option<Regime>,
        #[arg(long)]
        flex_ratio: Option<f64>,
        /// Output directory [env: FLEXMARKET_OUT_DIR, default: out]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid of flexible ratios, regimes, renewable settings and seeds.
    Sweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
        )]
        ratios: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_regime, default_value = "rtp,exg")]
        regimes: Vec<Regime>,
        #[arg(long, value_enum, default_value_t = Renewable::Off)]
        renewable: Renewable,
        /// Seeds per cell, counting up from the scenario seed.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long)]
        days: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Renewable {
    On,
    Off,
    Both,
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse::<Regime>().map_err(|e| e.to_string())
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(ENV_OUT_DIR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn base_scenario(path: Option<PathBuf>) -> flexmarket::Result<Scenario> {
    match path {
        Some(p) => load_scenario(p),
        None => Ok(Scenario::desk()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> flexmarket::Result<bool> {
    match cli.command {
        Command::Simulate {
            scenario,
            days,
            seed,
            regime,
            flex_ratio,
            out,
        } => {
            let mut s = base_scenario(scenario)?;
            if let Some(d) = days {
                s.n_days = d;
            }
            if let Some(seed) = seed {
                s.seed = seed;
            }
            if let Some(r) = regime {
                s.regime = r;
            }
            if let Some(x) = flex_ratio {
                s.flexible_ratio = x;
            }
            let report = run_simulation(&s, s.seed)?;
            let dir = out_dir(out);
            write_outputs(&report, &dir)?;
            let m = &report.metrics;
            println!(
                "{} days ({} measured), regime {}, flexible ratio {}",
                report.days.len(),
                m.measured_days,
                s.regime,
                s.flexible_ratio
            );
            println!(
                "combined {:.4} EUR/MWh (usage {:.4}, balancing {:.4}), balancing energy {:.1} MWh, mean spot {:.3} EUR/MWh",
                m.costs.combined, m.costs.usage, m.costs.balancing, m.balancing_energy_mwh, m.mean_spot
            );
            println!("results in {}", dir.display());
            Ok(true)
        }
        Command::Sweep {
            scenario,
            ratios,
            regimes,
            renewable,
            seeds,
            days,
            seed,
            out,
        } => {
            let mut s = base_scenario(scenario)?;
            if let Some(d) = days {
                s.n_days = d;
            }
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let spec = SweepSpec {
                ratios,
                regimes,
                renewable: match renewable {
                    Renewable::On => vec![true],
                    Renewable::Off => vec![false],
                    Renewable::Both => vec![false, true],
                },
                seeds,
            };
            let threads = std::env::var(ENV_THREADS)
                .ok()
                .and_then(|t| t.parse::<usize>().ok());
            let summary = match threads {
                Some(n) if n > 0 => run_sweep_with_threads(&s, &spec, n)?,
                _ => run_sweep(&s, &spec)?,
            };
            let dir = out_dir(out);
            write_sweep_outputs(&s, &spec, &summary, &dir)?;
            println!("ratio,regime,renewable,runs,combined,usage,balancing,balancing_energy_mwh");
            for m in &summary.means {
                println!(
                    "{},{},{},{},{:.4},{:.4},{:.4},{:.1}",
                    m.ratio,
                    m.regime,
                    m.renewable,
                    m.runs,
                    m.combined,
                    m.usage,
                    m.balancing,
                    m.balancing_energy_mwh
                );
            }
            for r in summary.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "cell ratio={} regime={} renewable={} seed={} failed: {}",
                    r.cell.ratio,
                    r.cell.regime,
                    r.cell.renewable,
                    r.cell.seed,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            println!("results in {}", dir.display());
            Ok(summary.all_ok())
        }
    }
}
