//! Field of a point source in the layered medium, written as CSV together
//! with the per-line maximum amplitude.

use helmsweep::harness::{dump_solution, ExperimentConfig, SourceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/layered_dosm.json");
    let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?;
    cfg.alpha = 1.0;
    let (u, csv) = dump_solution(&cfg, SourceSpec::Point(16, 32), false)?;
    let out = std::env::temp_dir().join("helmsweep_point_source.csv");
    std::fs::write(&out, csv)?;
    let m = cfg.problem()?.op.m();
    for (p, line) in u.chunks(m).enumerate().step_by(8) {
        let peak = line.iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!("line {p:3}  max |u| = {peak:.3e}");
    }
    println!("wrote {}", out.display());
    Ok(())
}
