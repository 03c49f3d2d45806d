use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;

use rreed::config::load_config;
use rreed::engine::Metrics;
use rreed::{report, ScenarioConfig};

/// Simulate QoS-aware geographic routing in a wireless sensor network.
#[derive(Debug, Parser)]
#[command(name = "rreed", version)]
struct Args {
    /// Scenario file (`key = value` lines). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Run this many consecutive seeds starting at the master seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Simulated seconds, overriding the file.
    #[arg(long)]
    duration: Option<f64>,
    /// Directory for metrics.csv and timeline.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Do not print the per-run summary.
    #[arg(long)]
    quiet: bool,
}

fn write_outputs(dir: &Path, runs: &[Metrics], interval: f64) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    report::write_metrics_csv(BufWriter::new(File::create(dir.join("metrics.csv"))?), runs)?;
    report::write_timeline_csv(
        BufWriter::new(File::create(dir.join("timeline.csv"))?),
        runs,
        interval,
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match &args.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(duration) = args.duration {
        config.duration = duration;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if args.seeds == 0 {
        eprintln!("error: --seeds must be at least 1");
        return ExitCode::from(2);
    }

    let seeds: Vec<u64> = (0..args.seeds)
        .map(|i| config.seed.wrapping_add(i))
        .collect();
    let runs: Vec<Metrics> = seeds
        .par_iter()
        .map(|&seed| {
            let c = ScenarioConfig {
                seed,
                ..config.clone()
            };
            rreed::run(&c).expect("validated config")
        })
        .collect();

    if !args.quiet {
        for m in &runs {
            print!("{}", report::summary(m));
        }
    }
    if let Err(e) = write_outputs(&args.out, &runs, config.timeline_interval) {
        eprintln!("error: cannot write results to {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
