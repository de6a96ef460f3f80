use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finphase_cli::{run, Command, RunOptions};

#[derive(Parser)]
#[command(name = "finphase", version, about = "Section volumes, oscillatory integrals and exact lemma checks for convex hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for Monte Carlo and randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Sectional volume profiles and polynomiality verdicts.
    Volume { config: PathBuf },
    /// Oscillatory integrals, Stokes identity, decay and expansions.
    Oscillate { config: PathBuf },
    /// Exact lemma checks and Morse charts.
    Lemmas { config: PathBuf },
    /// Every suite present in the config.
    All { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (command, config) = match cli.command {
        Sub::Volume { config } => (Command::Volume, config),
        Sub::Oscillate { config } => (Command::Oscillate, config),
        Sub::Lemmas { config } => (Command::Lemmas, config),
        Sub::All { config } => (Command::All, config),
    };
    let opts = RunOptions { out: cli.out, seed: cli.seed, svg: cli.svg };
    match run(command, &config, &opts) {
        Ok(checks) => {
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
