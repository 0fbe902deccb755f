use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use schwarzschild_le::report::{exit, exit_code, parse_config, run, Mode, RunConfig};
use schwarzschild_le::Error;

/// Localized-energy multiplier scans and mode evolution on higher-dimensional
/// Schwarzschild exteriors.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    /// What to run. Falls back to `mode` in the config file.
    #[arg(value_enum)]
    mode: Option<Mode>,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug)]
struct Opts {
    /// Sectioned TOML configuration; absent keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated dimensions `d = n - 3`, e.g. `1,2,3`.
    #[arg(long, value_name = "LIST", value_delimiter = ',', allow_negative_numbers = true)]
    d: Option<Vec<i64>>,
    /// Scan points per region.
    #[arg(long, value_name = "N")]
    grid_points: Option<usize>,
    /// Refine scans near their minima (`--refine false` turns it off).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    refine: Option<bool>,
    /// Seed of the random test-function family.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn load(opts: &Opts) -> Result<RunConfig, Error> {
    let text = match &opts.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(d) = &opts.d {
        cfg.background.d = d.clone();
    }
    if let Some(n) = opts.grid_points {
        cfg.grid.points_per_region = n;
    }
    if let Some(r) = opts.refine {
        cfg.grid.refine = r;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(o) = &opts.out {
        cfg.output.dir = o.display().to_string();
    }
    // validate the merged result, not just the file
    parse_config(&cfg.to_toml())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let Some(mode) = cli.mode.or(cfg.mode) else {
        eprintln!("no mode given: pass one of verify, budget, hardy, evolve, all");
        return ExitCode::from(exit::CONFIG as u8);
    };
    match run(mode, &cfg) {
        Ok(summary) => {
            for r in &summary.records {
                println!("{}", r.describe());
            }
            for r in summary.failures() {
                eprintln!("failed: {}", r.describe());
            }
            println!("summary written to {}/summary.json", cfg.output.dir);
            ExitCode::from(summary.exit_status() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
