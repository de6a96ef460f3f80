//! Library side of the `finphase` command line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod suites;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
use suites::RunContext;

/// Which suites to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Volume,
    Oscillate,
    Lemmas,
    All,
}

/// One verdict line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(suite: &str, name: &str, passed: bool, detail: String) -> Self {
        Check { suite: suite.into(), name: name.into(), passed, detail }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}/{}: {}", self.suite, self.name, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub svg: bool,
}

/// Loads `config_path`, runs the selected suites and writes all outputs.
pub fn run(command: Command, config_path: &Path, opts: &RunOptions) -> CliResult<Vec<Check>> {
    let cfg = ExperimentConfig::load(config_path)?;
    run_config(command, &cfg, opts)
}

pub fn run_config(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> CliResult<Vec<Check>> {
    let out_dir = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("finphase-out"));
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let ctx = RunContext { out_dir, seed: opts.seed.unwrap_or(cfg.seed), svg: opts.svg };

    let want = |c: Command| command == c || command == Command::All;
    let missing = |name: &str| CliError::Config(format!("config has no `{name}` section"));
    let mut checks = Vec::new();
    if want(Command::Volume) {
        match &cfg.volume {
            Some(v) => checks.extend(suites::run_volume(cfg, v, &ctx)?),
            None if command == Command::Volume => return Err(missing("volume")),
            None => {}
        }
    }
    if want(Command::Oscillate) {
        match &cfg.oscillate {
            Some(o) => checks.extend(suites::run_oscillate(cfg, o, &ctx)?),
            None if command == Command::Oscillate => return Err(missing("oscillate")),
            None => {}
        }
    }
    if want(Command::Lemmas) {
        match &cfg.lemmas {
            Some(l) => checks.extend(suites::run_lemmas(l, &ctx)?),
            None if command == Command::Lemmas => return Err(missing("lemmas")),
            None => {}
        }
    }
    if command == Command::All && checks.is_empty() && cfg.volume.is_none() && cfg.oscillate.is_none() && cfg.lemmas.is_none() {
        return Err(CliError::Config("config selects no suite".into()));
    }

    let text: String = checks.iter().map(|c| format!("{c}\n")).collect();
    let path = ctx.out_dir.join("checks.txt");
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    output::write_json(&ctx.out_dir.join("checks.json"), &checks)?;
    Ok(checks)
}
