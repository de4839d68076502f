//! The four iteration-count tables: layered media with contrast `α`,
//! `p` equal strips with one layer each, three outer conditions and two
//! drivers per cell.

use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{drive, csv_row, Driver, ExperimentConfig, HarnessError, Setting, CSV_HEADER};
use crate::assembly::random_source;
use crate::linalg::StopOn;
use crate::precond::build_method;

pub const ALPHAS: [f64; 7] = [0.0, 0.001, 0.005, 0.01, 0.05, 0.1, 1.0];
pub const PARTS: [usize; 3] = [4, 8, 16];
pub const OUTERS: [&str; 3] = ["robin", "pml:5", "pml:10"];

/// Published counts, `0` for `-`. Row `α`, then for each `p` the
/// iterative triple and the GMRES triple (Robin, PML 5h, PML 10h).
type Half = [[u8; 18]; 7];

#[rustfmt::skip]
const PUBLISHED: [[Half; 2]; 4] = [
    [
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [4,3,3,3,3,3, 5,3,3,4,3,3, 6,3,3,4,3,3],
            [6,4,4,5,3,4, 12,5,5,7,4,4, 13,5,4,8,5,5],
            [8,5,4,5,4,4, 16,6,5,8,5,5, 38,7,7,11,6,6],
            [0,8,6,8,6,5, 0,17,12,16,7,8, 0,12,26,22,9,10],
            [32,10,11,10,7,6, 0,0,0,18,11,11, 0,0,0,26,14,15],
            [0,0,0,20,19,19, 0,0,0,45,38,38, 0,0,0,86,63,62],
        ],
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [4,2,3,3,3,3, 5,3,3,4,3,3, 7,4,4,6,4,4],
            [7,3,3,5,3,3, 0,5,4,0,4,4, 30,6,6,12,6,5],
            [11,4,4,6,4,4, 0,6,5,11,5,5, 0,10,10,19,7,6],
            [0,0,0,13,7,6, 0,0,0,23,12,11, 0,0,0,47,17,16],
            [0,22,31,14,9,9, 0,0,0,23,12,11, 0,0,0,50,24,23],
            [0,0,0,36,21,19, 0,0,0,70,64,64, 0,0,0,0,95,90],
        ],
    ],
    [
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [3,2,2,3,2,2, 3,2,2,3,2,2, 3,2,2,3,2,2],
            [5,3,3,4,3,3, 5,3,3,4,3,3, 5,3,3,4,3,3],
            [7,4,3,4,3,3, 7,4,4,5,3,3, 7,4,4,5,4,3],
            [42,12,7,7,5,4, 0,16,12,9,5,5, 0,21,17,13,7,6],
            [0,0,0,9,7,6, 0,0,0,14,12,11, 0,0,0,20,17,17],
            [0,0,0,26,23,24, 0,0,0,48,47,47, 0,0,0,59,68,65],
        ],
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [3,2,3,3,2,2, 3,2,3,3,2,2, 3,2,3,3,2,2],
            [5,3,4,4,3,3, 6,3,4,5,3,3, 7,3,4,5,4,3],
            [8,4,6,5,4,4, 12,4,6,6,4,4, 30,5,6,7,5,4],
            [0,0,0,10,7,6, 0,0,0,16,11,10, 0,0,0,22,16,16],
            [0,0,0,13,11,9, 0,0,0,19,14,13, 0,0,0,32,22,22],
            [0,0,0,43,40,38, 0,0,0,79,77,77, 0,0,0,0,0,0],
        ],
    ],
    [
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [2,2,2,2,2,2, 3,3,2,3,2,2, 3,3,3,3,3,3],
            [3,3,3,3,3,3, 4,3,3,4,3,3, 4,3,3,4,3,3],
            [3,3,3,3,3,3, 4,4,3,4,3,3, 5,4,4,5,4,3],
            [5,5,5,5,4,4, 7,5,5,6,5,5, 8,6,5,8,5,5],
            [7,6,5,6,5,5, 9,6,6,8,6,6, 12,7,7,10,7,6],
            [0,31,27,15,12,12, 0,0,0,32,25,22, 0,0,0,58,34,29],
        ],
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [3,2,2,3,2,2, 3,2,2,3,2,2, 3,3,3,3,3,3],
            [3,3,3,3,3,3, 4,3,3,4,3,3, 5,3,3,5,3,3],
            [4,3,3,4,3,3, 5,3,3,5,3,3, 6,4,4,6,4,4],
            [6,4,4,6,4,4, 10,5,5,8,5,5, 14,6,6,11,6,6],
            [8,5,5,7,5,5, 13,6,6,10,6,6, 14,8,7,12,8,7],
            [0,0,52,23,13,12, 0,0,0,39,24,22, 0,0,0,99,61,48],
        ],
    ],
    [
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [3,2,2,2,2,2, 2,2,2,2,2,2, 2,2,2,2,2,2],
            [3,3,3,3,3,3, 3,3,3,3,3,3, 3,3,3,3,3,3],
            [3,3,3,3,3,3, 3,3,3,3,3,3, 3,3,3,3,3,3],
            [5,4,4,4,4,4, 5,5,4,4,4,4, 5,5,4,4,4,4],
            [6,5,5,5,5,4, 6,6,5,5,5,5, 7,6,5,6,5,5],
            [0,0,0,23,33,37, 0,0,0,35,44,44, 0,0,0,41,43,48],
        ],
        [
            [1,1,1,1,1,1, 1,1,1,1,1,1, 1,1,1,1,1,1],
            [3,2,2,2,2,2, 3,3,2,2,2,2, 3,3,2,2,2,2],
            [3,3,3,3,3,3, 3,3,3,3,3,3, 3,3,3,3,3,3],
            [4,3,3,3,3,3, 3,3,3,3,3,3, 3,3,3,3,3,3],
            [5,5,5,5,4,4, 5,5,5,5,4,4, 5,5,5,5,5,4],
            [7,7,6,6,6,5, 9,7,6,7,6,5, 9,7,7,7,6,6],
            [0,0,0,32,43,45, 0,0,0,49,54,61, 0,0,0,79,94,75],
        ],
    ],
];

fn half_index(h: usize) -> Result<usize, HarnessError> {
    match h {
        64 => Ok(0),
        128 => Ok(1),
        _ => Err(HarnessError::Config(format!("h must be 64 or 128 (for 1/h), got {h}"))),
    }
}

fn table_index(id: usize) -> Result<usize, HarnessError> {
    (1..=4).contains(&id).then(|| id - 1).ok_or_else(|| HarnessError::Config(format!("table id must be 1..4, got {id}")))
}

/// Published value of one cell: `Some(None)` for `-`.
pub fn published_value(id: usize, h: usize, alpha: f64, p: usize, driver: Driver, outer: &str) -> Option<Option<usize>> {
    let t = table_index(id).ok()?;
    let half = half_index(h).ok()?;
    let row = ALPHAS.iter().position(|&a| a == alpha)?;
    let pi = PARTS.iter().position(|&q| q == p)?;
    let oi = OUTERS.iter().position(|&o| o == outer)?;
    let di = usize::from(driver == Driver::Gmres);
    let v = PUBLISHED[t][half][row][pi * 6 + di * 3 + oi];
    Some((v > 0).then_some(v as usize))
}

/// The config of one table cell. Tables 1 and 3 use the LU sweep, 2 and 4
/// the non-overlapping double sweep, both with identity-extension closures.
pub fn cell_config(id: usize, h: usize, alpha: f64, p: usize, outer: &str, driver: Driver) -> Result<ExperimentConfig, HarnessError> {
    let t = table_index(id)?;
    let half = half_index(h)?;
    let base = if half == 0 { 20.0 } else { 40.0 };
    let row = ALPHAS.iter().position(|&a| a == alpha).unwrap_or(ALPHAS.len());
    Ok(ExperimentConfig {
        nx: h - 1,
        ny: h - 1,
        base_k: vec![base; 4],
        delta_k: vec![0.0, base, base / 2.0, -base / 2.0],
        alpha,
        repeats: p / 4,
        outer: outer.into(),
        setting: if t < 2 { Setting::Guide } else { Setting::Open },
        p,
        method: if t % 2 == 0 { "lu-sweep" } else { "dosm" }.into(),
        transmission: "ident-ext".into(),
        driver,
        tol: 1e-6,
        maxit: 100,
        seed: (1000 * id + 100 * half + 10 * row + p) as u64,
        overlap: 0,
        theta: 0.5,
        stop: StopOn::Preconditioned,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableCell {
    pub config: ExperimentConfig,
    pub iters: usize,
    pub converged: bool,
    pub final_res: f64,
    pub wall_ms: f64,
    /// Build plus solve time.
    pub cell_ms: f64,
    pub csv: String,
}

impl TableCell {
    pub fn entry(&self) -> Option<usize> {
        self.converged.then_some(self.iters)
    }
}

/// Cells for the given `α` rows and strip counts, both drivers sharing one
/// build. Cells run on all cores; the output order is fixed.
pub fn reproduce_cells(id: usize, h: usize, alphas: &[f64], parts: &[usize]) -> Result<Vec<TableCell>, HarnessError> {
    let mut keys = Vec::new();
    for &alpha in alphas {
        for &p in parts {
            for outer in OUTERS {
                keys.push((alpha, p, outer));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<[TableCell; 2], HarnessError>>>> = Mutex::new((0..keys.len()).map(|_| None).collect());
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(keys.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(alpha, p, outer)) = keys.get(i) else { break };
                let r = run_cell(id, h, alpha, p, outer);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut out = Vec::with_capacity(2 * keys.len());
    for r in results.into_inner().unwrap() {
        out.extend(r.expect("every cell ran")?);
    }
    Ok(out)
}

fn run_cell(id: usize, h: usize, alpha: f64, p: usize, outer: &str) -> Result<[TableCell; 2], HarnessError> {
    let start = std::time::Instant::now();
    let cfg = cell_config(id, h, alpha, p, outer, Driver::Richardson)?;
    let pb = cfg.problem()?;
    let pre = build_method(&pb, &cfg.method_spec()?)?;
    let f = random_source(&pb.op, cfg.seed);
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let cell = |driver| {
        let cfg = ExperimentConfig { driver, ..cfg.clone() };
        let (_, r, _) = drive(&pb, &pre, &cfg, &f);
        TableCell {
            csv: csv_row(&cfg, &r),
            iters: r.iters,
            converged: r.converged,
            final_res: r.final_residual(),
            wall_ms: r.wall_ms,
            cell_ms: build_ms + r.wall_ms,
            config: cfg,
        }
    };
    Ok([cell(Driver::Richardson), cell(Driver::Gmres)])
}

/// The whole table half selected by `h`.
pub fn reproduce_table(id: usize, h: usize) -> Result<Vec<TableCell>, HarnessError> {
    reproduce_cells(id, h, &ALPHAS, &PARTS)
}

pub fn table_csv(cells: &[TableCell]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for c in cells {
        s.push_str(&c.csv);
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_lookup() {
        assert_eq!(published_value(1, 64, 1.0, 4, Driver::Gmres, "robin"), Some(Some(20)));
        assert_eq!(published_value(1, 64, 1.0, 4, Driver::Richardson, "pml:10"), Some(None));
        assert_eq!(published_value(2, 64, 0.01, 4, Driver::Richardson, "pml:10"), Some(Some(3)));
        assert_eq!(published_value(3, 64, 0.1, 8, Driver::Gmres, "pml:5"), Some(Some(6)));
        assert_eq!(published_value(4, 64, 0.05, 16, Driver::Richardson, "robin"), Some(Some(5)));
        assert_eq!(published_value(4, 128, 1.0, 16, Driver::Gmres, "pml:10"), Some(Some(75)));
        assert_eq!(published_value(5, 64, 1.0, 4, Driver::Gmres, "robin"), None);
        for t in PUBLISHED.iter().flatten() {
            assert!(t[0].iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn cell_layout() {
        let c = cell_config(4, 128, 0.05, 8, "pml:5", Driver::Gmres).unwrap();
        assert_eq!((c.nx, c.repeats, c.method.as_str(), c.setting), (127, 2, "dosm", Setting::Open));
        assert_eq!(c.delta_k, vec![0.0, 40.0, 20.0, -20.0]);
        assert!(cell_config(5, 64, 0.0, 4, "robin", Driver::Gmres).is_err());
        assert!(cell_config(1, 32, 0.0, 4, "robin", Driver::Gmres).is_err());
    }
}
