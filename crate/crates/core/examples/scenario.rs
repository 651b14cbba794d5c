//! Runs a scenario file through every command and prints the exit codes;
//! reports land in a temporary directory.
//!
//! `cargo run --example scenario -- fixtures/affine.json`

use std::path::PathBuf;

use orbita::cli::{execute, write_outcome, CommandKind, RunOptions};
use orbita::scenario::Scenario;

pub fn run_example() -> orbita::Result<()> {
    let path = std::env::args()
        .nth(1)
        .filter(|a| a.ends_with(".json"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/linear_diag.json"));
    let scenario = Scenario::load(&path)?;
    println!("{} (hash {})", scenario.name, &scenario.hash()[..12]);
    let out = std::env::temp_dir().join("orbita-scenario-example");
    let opts = RunOptions {
        budget_override: None,
        seed: None,
    };
    for kind in [CommandKind::NormalForm, CommandKind::Dominance, CommandKind::Linearize, CommandKind::Orbit] {
        let outcome = execute(kind, &scenario, &opts);
        write_outcome(&outcome, &scenario, &opts, &out)?;
        println!("{:<12} exit {}", kind.name(), outcome.exit_code);
    }
    println!("reports in {}", out.display());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
