use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use utpp::Controller;
use utpp_cli::{batch_command, load_scenario, run_command, Overrides};

/// Path-tracking simulator comparing pure pursuit with its unscented variant.
#[derive(Debug, Parser)]
#[command(name = "utpp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single run: trajectory CSV, summary CSV and an optional SVG plot.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write an SVG plot of the path and the steering angle.
        #[arg(long)]
        svg: bool,
    },
    /// N seeded runs per controller, written as an aggregate summary CSV.
    Batch {
        #[command(flatten)]
        common: Common,
        /// Number of runs per controller.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// pp or utpp.
    #[arg(long)]
    controller: Option<Controller>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Replace the road: line:M,C | circle:X,Y,R | waypoints:FILE
    #[arg(long)]
    road: Option<String>,
    /// Zero the pose covariance.
    #[arg(long)]
    no_noise: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            road: self.road.clone(),
            controller: self.controller,
            seed: self.seed,
            steps: self.steps,
            no_noise: self.no_noise,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common, svg } => load_scenario(&common.config, &common.overrides())
            .and_then(|s| run_command(&s, &common.out_dir, *svg))
            .map(|out| {
                println!("{}", out.trajectory.display());
                println!("{}", out.summary.display());
                if let Some(svg) = out.svg {
                    println!("{}", svg.display());
                }
            }),
        Command::Batch { common, n } => load_scenario(&common.config, &common.overrides())
            .and_then(|s| batch_command(&s, *n as usize, &common.out_dir))
            .map(|out| {
                println!("{}", out.aggregate.display());
                println!("{}", out.runs.display());
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
