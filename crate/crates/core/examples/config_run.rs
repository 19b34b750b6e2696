//! Runs a scenario config through the library entry point used by the binary.
//!
//! `cargo run --example config_run -- crates/core/examples/configs/heavy_tails.toml`

use std::path::PathBuf;

use boolrv::cli::{run, RunSettings, ScenarioConfig, Verb};

fn main() -> boolrv::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/dirac_algebra.toml"));
    let cfg = ScenarioConfig::load(&path)?;
    let out = std::env::temp_dir().join("boolrv-config-run");
    let settings = RunSettings { precision: None, workers: Some(1), out: out.clone(), seed: None };
    let outcome = run(Verb::Report, &cfg, &settings, &[])?;
    println!("wrote {} files to {}", outcome.files.len(), out.display());
    for v in &outcome.verifications {
        println!("{v:?}");
    }
    println!("all passed: {}", outcome.all_passed);
    Ok(())
}
