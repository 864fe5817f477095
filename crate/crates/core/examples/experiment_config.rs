// The config-driven runner behind the `stochlab` binary, used as a library.

use stochlab::cli::{execute, Command, ExperimentConfig};

const CONFIG: &str = r#"
version = 1

[model]
id = "larmor_preserving"

[model.params]
b = [0.0, 0.0, 2.0]
gamma = 0.5

[run]
t_end = 2.0
h = 1e-3
seed = 1
n_paths = 64
x0 = [0.6, 0.0, 0.8]
functionals = ["norm_sq", "mu_dot_b"]

[[analysis]]
kind = "invariance"
field = "sphere"

[[analysis]]
kind = "equilibrium"
"#;

/// Returns whether every check passed.
pub fn run_example() -> stochlab::Result<bool> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let out = std::env::temp_dir().join(format!("stochlab-example-{}", std::process::id()));
    let mut passed = true;
    for cmd in [Command::Simulate, Command::Check] {
        let o = execute(cmd, &cfg, &out, None)?;
        for line in &o.summary {
            println!("{line}");
        }
        for f in &o.files {
            println!("  wrote {}", f.display());
        }
        passed &= o.passed;
    }
    std::fs::remove_dir_all(&out)?;
    Ok(passed)
}

fn main() {
    run_example().unwrap();
}
