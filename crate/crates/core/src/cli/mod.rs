//! Config-driven experiment runner.
//!
//! Four commands read an [`ExperimentConfig`] and write CSV / text reports
//! into an output directory:
//!
//! * `simulate` – one trajectory (`trajectory.csv`) or ensemble moments
//!   (`ensemble.csv`) of the configured functionals;
//! * `check` – `invariance`, `equilibrium`, `lyapunov`, `first-integral` and
//!   `symplecticity` analyses;
//! * `convergence` – `convergence` analyses;
//! * `stability` – `stability` and `attraction` analyses.
//!
//! Exit codes: 0 success / all checks pass, 1 a check failed or an
//! integration aborted, 2 invalid configuration or input.

mod commands;
mod config;
mod setup;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use commands::{execute, Outcome};
pub use config::{
    Analysis, EtaConfig, ExperimentConfig, ModelSection, OracleKind, RunSection, SamplerKind, StartConfig,
    CONFIG_VERSION,
};
pub use setup::{resolve_field, Experiment};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Check,
    Convergence,
    Stability,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Check => "check",
            Command::Convergence => "convergence",
            Command::Stability => "stability",
        }
    }

    /// Whether an analysis is run by this command.
    pub fn runs(self, a: &Analysis) -> bool {
        match self {
            Command::Simulate => false,
            Command::Check => matches!(
                a,
                Analysis::Invariance { .. }
                    | Analysis::Equilibrium { .. }
                    | Analysis::Lyapunov { .. }
                    | Analysis::FirstIntegral { .. }
                    | Analysis::Symplecticity { .. }
            ),
            Command::Convergence => matches!(a, Analysis::Convergence { .. }),
            Command::Stability => matches!(a, Analysis::Stability { .. } | Analysis::Attraction { .. }),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Command::Simulate,
            Command::Check,
            Command::Convergence,
            Command::Stability,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown command `{s}`")))
    }
}

/// Command-line level options.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Exit code for an error: integration aborts are failures, everything else
/// is invalid input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFinite { .. } | Error::PathAborted { .. } => EXIT_FAIL,
        _ => EXIT_INVALID,
    }
}

/// Loads the config, applies overrides and runs the command. Messages go to
/// stdout (summary) and stderr (errors).
pub fn run(cmd: Command, opts: &RunOptions) -> i32 {
    let loaded = std::fs::read_to_string(&opts.config)
        .map_err(Error::from)
        .and_then(|text| ExperimentConfig::parse(&text));
    let mut cfg = match loaded {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", opts.config.display());
            return EXIT_INVALID;
        }
    };
    if let Some(seed) = opts.seed {
        cfg.run.seed = seed;
    }
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.run.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").to_path_buf());
    match execute(cmd, &cfg, &out, opts.threads) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NonFinite { step, time, .. } = &e {
                eprintln!("  aborted at step {step}, t = {time}");
            }
            exit_code(&e)
        }
    }
}
