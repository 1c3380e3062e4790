//! Scenario files, CSV/SVG output and the `run` / `batch` commands behind the
//! `utpp` binary.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use utpp::sim::{self, BatchAggregate, Controller};
use utpp::Scenario;

pub mod config;
pub mod output;

pub use config::{apply_overrides, parse_config, parse_config_str, parse_road_spec, Overrides};
pub use output::{emit_csv, emit_svg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] utpp::Error),
}

/// Loads a scenario file and applies command-line overrides.
pub fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, CliError> {
    let mut scenario = parse_config(path)?;
    apply_overrides(&mut scenario, overrides)?;
    Ok(scenario)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn seed_of(scenario: &Scenario) -> u64 {
    scenario.noise.map_or(0, |n| n.rng_seed)
}

/// Files written by [`run_command`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub trajectory: PathBuf,
    pub summary: PathBuf,
    pub svg: Option<PathBuf>,
}

/// One run: trajectory CSV, one-row summary CSV and, optionally, an SVG plot.
pub fn run_command(scenario: &Scenario, out_dir: &Path, svg: bool) -> Result<RunOutputs, CliError> {
    ensure_dir(out_dir)?;
    let (records, summary) = sim::run(scenario)?;
    let stem = format!("{}_seed{}", scenario.controller, seed_of(scenario));
    let outputs = RunOutputs {
        trajectory: out_dir.join(format!("{stem}_trajectory.csv")),
        summary: out_dir.join(format!("{stem}_summary.csv")),
        svg: svg.then(|| out_dir.join(format!("{stem}.svg"))),
    };
    emit_csv(&records, &outputs.trajectory)?;
    output::emit_summaries(&[summary], &outputs.summary)?;
    if let Some(path) = &outputs.svg {
        emit_svg(&records, &scenario.road, path)?;
    }
    log::info!(
        "{}: convergence {:?} s, mean |lateral error| {:.4} m, {} faults",
        scenario.controller,
        summary.convergence_time,
        summary.mean_abs_lateral_error,
        summary.fault_count
    );
    Ok(outputs)
}

/// Files written by [`batch_command`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutputs {
    pub aggregate: PathBuf,
    pub runs: PathBuf,
    pub aggregates: Vec<BatchAggregate>,
}

/// `n` seeded runs for each controller. Both controllers see the same noise
/// sequences: run `i` uses the base seed with stream `i`.
pub fn batch_command(scenario: &Scenario, n: usize, out_dir: &Path) -> Result<BatchOutputs, CliError> {
    ensure_dir(out_dir)?;
    let seed = seed_of(scenario);
    let mut summaries = Vec::with_capacity(2 * n);
    let mut aggregates = Vec::with_capacity(2);
    for controller in [Controller::PurePursuit, Controller::UnscentedPurePursuit] {
        let scenario = Scenario {
            controller,
            ..scenario.clone()
        };
        let result = sim::run_batch(&scenario, n, seed)?;
        log::info!(
            "{controller}: {}/{} runs converged, median {:?} s",
            result.aggregate.converged_runs,
            n,
            result.aggregate.median_convergence_time
        );
        summaries.extend(result.summaries);
        aggregates.push(result.aggregate);
    }
    let outputs = BatchOutputs {
        aggregate: out_dir.join(format!("batch_seed{seed}_aggregate.csv")),
        runs: out_dir.join(format!("batch_seed{seed}_runs.csv")),
        aggregates,
    };
    output::emit_aggregates(&outputs.aggregates, &outputs.aggregate)?;
    output::emit_summaries(&summaries, &outputs.runs)?;
    Ok(outputs)
}
