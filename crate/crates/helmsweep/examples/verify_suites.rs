//! Print every check of the three verification suites.

use helmsweep::harness::{verify_suite, SUITES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in SUITES {
        let rep = verify_suite(name)?;
        println!("== {name}: {}", if rep.pass { "pass" } else { "FAIL" });
        for c in &rep.checks {
            let op = if c.upper { "<=" } else { ">=" };
            println!("  {} {:<34} {:<28} {:.2e} {op} {:.0e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.config, c.measured, c.tol);
        }
    }
    Ok(())
}
