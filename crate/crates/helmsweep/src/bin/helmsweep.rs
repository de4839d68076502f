use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use helmsweep::harness::{
    csv_row, dump_solution, parse_source, reproduce_cells, run_experiment, table, table_csv, verify_suite,
    ExperimentConfig, HarnessError, CSV_HEADER, SUITES,
};

#[derive(Parser)]
#[command(name = "helmsweep", about = "Sweeping preconditioners for the 2-D Helmholtz equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate one iteration-count table.
    Table {
        #[arg(long)]
        id: usize,
        /// Inverse mesh size: 64 or 128.
        #[arg(long)]
        h: usize,
        #[arg(long)]
        out: PathBuf,
        /// Restrict to these strip counts (default 4, 8, 16).
        #[arg(long, value_delimiter = ',')]
        parts: Option<Vec<usize>>,
    },
    /// Run a verification suite: nilpotency, equivalence, structure or all.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve directly and write the field as CSV.
    Dump {
        #[arg(long)]
        config: PathBuf,
        /// `point:i,j` or `random:seed`.
        #[arg(long)]
        source: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        include_pml: bool,
    },
}

fn read_config(path: &PathBuf) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn run(cmd: Cmd) -> Result<bool, HarnessError> {
    match cmd {
        Cmd::Run { config, out } => {
            let cfg = read_config(&config)?;
            let res = run_experiment(&cfg)?;
            if res.under_resolved {
                eprintln!("warning: fewer than ten points per wavelength");
            }
            if let Some(w) = &res.warning {
                eprintln!("warning: {w}");
            }
            let text = format!("{CSV_HEADER}\n{}\n", csv_row(&cfg, &res.report));
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Cmd::Table { id, h, out, parts } => {
            let parts = parts.unwrap_or_else(|| table::PARTS.to_vec());
            let cells = reproduce_cells(id, h, &table::ALPHAS, &parts)?;
            std::fs::write(out, table_csv(&cells))?;
            Ok(true)
        }
        Cmd::Verify { suite, out } => {
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let reports = names.iter().map(|s| verify_suite(s)).collect::<Result<Vec<_>, _>>()?;
            for r in &reports {
                let failed = r.checks.iter().filter(|c| !c.pass).count();
                eprintln!("{}: {} checks, {failed} failed", r.suite, r.checks.len());
            }
            std::fs::write(out, serde_json::to_string_pretty(&reports)?)?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Cmd::Dump { config, source, out, include_pml } => {
            let cfg = read_config(&config)?;
            let (_, text) = dump_solution(&cfg, parse_source(&source)?, include_pml)?;
            std::fs::write(out, text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 3 } else { 1 })
        }
    }
}
