//! Run one experiment from a JSON config and print its residual history.
//!
//! cargo run --release --example run_config -- [path/to/config.json]

use helmsweep::harness::{run_experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/layered_dosm.json").into());
    let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path)?)?;
    let out = run_experiment(&cfg)?;
    println!("{} p={} alpha={} outer={} {:?}", cfg.method, cfg.p, cfg.alpha, cfg.outer, cfg.driver);
    for (it, r) in out.report.history.iter().enumerate() {
        println!("{it:3}  {r:.3e}");
    }
    println!("iterations: {}  converged: {}  {:.0} ms", out.report.table_entry(), out.report.converged, out.report.wall_ms);
    Ok(())
}
