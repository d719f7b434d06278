use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use e2rc::jobs::{parse_key_values, run_job, Command, JobConfig, RunContext};

/// Rate-compatible LDPC design, analysis and simulation.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// exit-curve, design, design-joint, predict, proto-search,
    /// proto-family, lift, simulate or sr-classify
    command: String,
    /// key=value overrides applied after the config file
    overrides: Vec<String>,
    /// Config file of key=value lines
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn run(cli: Cli) -> e2rc::Result<()> {
    let command: Command = cli.command.parse()?;
    let file = match &cli.config {
        Some(p) => parse_key_values(&std::fs::read_to_string(p)?)?,
        None => Vec::new(),
    };
    let overrides = cli.overrides.iter().map(|s| Ok(parse_key_values(s)?.remove(0))).collect::<e2rc::Result<Vec<_>>>()?;
    let cfg = JobConfig::resolve(command, &file, &overrides)?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| e2rc::Error::Config(e.to_string()))?;
    }
    let ctx = RunContext { seed: cli.seed, threads: rayon::current_num_threads(), out: cli.out };
    let out = run_job(&cfg, &ctx)?;
    for l in &out.summary {
        println!("{l}");
    }
    println!("wrote {} files to {}", out.files.len(), ctx.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
