//! Every registered preconditioner on one layered problem, under GMRES.

use helmsweep::harness::{run_experiment, Driver, ExperimentConfig, Setting};
use helmsweep::linalg::StopOn;
use helmsweep::precond::METHOD_NAMES;

fn main() {
    println!("{:<18} {:>6} {:>10} {:>9}", "method", "iters", "residual", "ms");
    for name in METHOD_NAMES {
        let transmission = match name {
            "slp1" | "slp2" | "resid-sub" | "source-transfer" => "pml:5",
            _ => "ident-ext",
        };
        let cfg = ExperimentConfig {
            nx: 63,
            ny: 63,
            base_k: vec![20.0; 4],
            delta_k: vec![0.0, 20.0, 10.0, -10.0],
            alpha: 0.1,
            repeats: 1,
            outer: "pml:5".into(),
            setting: Setting::Open,
            p: 4,
            method: name.into(),
            transmission: transmission.into(),
            driver: Driver::Gmres,
            tol: 1e-6,
            maxit: 100,
            seed: 1,
            overlap: if name == "dosm-gdc" { 2 } else { 0 },
            theta: 0.5,
            stop: StopOn::Preconditioned,
        };
        match run_experiment(&cfg) {
            Ok(out) => {
                let r = &out.report;
                println!("{name:<18} {:>6} {:>10.2e} {:>9.0}", r.table_entry(), r.final_residual(), r.wall_ms)
            }
            Err(e) => println!("{name:<18} error: {e}"),
        }
    }
}
