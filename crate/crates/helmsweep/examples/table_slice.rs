//! One row block of a published table next to the published counts.
//!
//! cargo run --release --example table_slice -- [table id] [p]

use helmsweep::harness::table::{reproduce_cells, ALPHAS};
use helmsweep::harness::{published_value, Driver};

fn show(v: Option<usize>) -> String {
    v.map_or("-".into(), |n| n.to_string())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (id, p) = (args.first().copied().unwrap_or(1), args.get(1).copied().unwrap_or(4));
    let cells = reproduce_cells(id, 64, &ALPHAS, &[p])?;
    println!("table {id}, h = 1/64, p = {p}: ours (published)");
    for &alpha in &ALPHAS {
        let mut line = format!("alpha={alpha:<6}");
        for driver in [Driver::Richardson, Driver::Gmres] {
            for c in cells.iter().filter(|c| c.config.alpha == alpha && c.config.driver == driver) {
                let published = published_value(id, 64, alpha, p, driver, &c.config.outer).flatten();
                line += &format!(" {:>4}({:>3})", show(c.entry()), show(published));
            }
            line += "  |";
        }
        println!("{line}");
    }
    Ok(())
}
