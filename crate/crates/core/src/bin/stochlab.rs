use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use stochlab::cli::{run, Command, RunOptions};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    Check,
    Convergence,
    Stability,
}

/// Run a stochlab experiment config.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `run.output`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let command = match args.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Check => Command::Check,
        Cmd::Convergence => Command::Convergence,
        Cmd::Stability => Command::Stability,
    };
    let opts = RunOptions {
        config: args.config,
        seed: args.seed,
        out: args.out,
        threads: args.threads,
    };
    std::process::exit(run(command, &opts));
}
