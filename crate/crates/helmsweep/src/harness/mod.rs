//! Experiment driver: configs, single runs, the iteration-count tables,
//! the verification suites and field dumps.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::random_source;
use crate::linalg::{gmres, richardson, IterationReport, LinearMap, Side, StopOn};
use crate::mesh::{build_grid, layered_wavenumber, resolution_ok, BoundaryCondition, BoundarySpec, MeshError, PmlSpec};
use crate::precond::{build_method, parse_kind, MethodSpec, PrecondError, Preconditioner, Problem};

pub mod dump;
pub mod table;
pub mod verify;

pub use dump::{dump_solution, parse_source, SourceSpec};
pub use table::{published_value, reproduce_cells, reproduce_table, table_csv, TableCell};
pub use verify::{verify_suite, Check, SuiteReport, SUITES};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Precond(#[from] PrecondError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Errors the user can fix by editing the config.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_) | HarnessError::Mesh(_) | HarnessError::Json(_) | HarnessError::Precond(PrecondError::UnknownMethod(_))
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    /// Dirichlet top and bottom.
    Guide,
    /// The outer condition on all four sides.
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Driver {
    Richardson,
    Gmres,
}

fn default_tol() -> f64 {
    1e-6
}
fn default_maxit() -> usize {
    100
}
fn default_kind() -> String {
    "ident-ext".into()
}
fn default_stop() -> StopOn {
    StopOn::Preconditioned
}
fn default_theta() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nx: usize,
    pub ny: usize,
    pub base_k: Vec<f64>,
    pub delta_k: Vec<f64>,
    pub alpha: f64,
    pub repeats: usize,
    /// `robin`, `pml:5`, `pml:10`, ...
    pub outer: String,
    pub setting: Setting,
    pub p: usize,
    pub method: String,
    #[serde(default = "default_kind")]
    pub transmission: String,
    pub driver: Driver,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_maxit")]
    pub maxit: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub overlap: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_stop")]
    pub stop: StopOn,
}

pub fn parse_outer(s: &str) -> Result<BoundaryCondition, HarnessError> {
    match s {
        "robin" => Ok(BoundaryCondition::Robin),
        _ => s
            .strip_prefix("pml:")
            .and_then(|w| w.parse().ok())
            .filter(|&w: &usize| w >= 1)
            .map(BoundaryCondition::Pml)
            .ok_or_else(|| HarnessError::Config(format!("outer must be robin or pml:W, got `{s}`"))),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.p == 0 {
            return bad("p must be at least 1".into());
        }
        if !(self.nx + 1).is_multiple_of(self.p) {
            return bad(format!("nx + 1 = {} is not divisible by p = {}", self.nx + 1, self.p));
        }
        parse_outer(&self.outer)?;
        parse_kind(&self.transmission).map_err(|e| HarnessError::Config(e.to_string()))?;
        if !crate::precond::METHOD_NAMES.contains(&self.method.as_str()) {
            return bad(format!("unknown method `{}`", self.method));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem, HarnessError> {
        self.validate()?;
        let grid = build_grid(self.nx, self.ny)?;
        let medium = layered_wavenumber(&self.base_k, &self.delta_k, self.alpha, self.repeats)?;
        medium.validate()?;
        let outer = parse_outer(&self.outer)?;
        let bc = match self.setting {
            Setting::Guide => BoundarySpec::guide(outer),
            Setting::Open => BoundarySpec::open(outer),
        };
        let pml = outer.pml_width().map(|w| PmlSpec::new(w, grid.h, medium.layer_k(0)));
        Ok(Problem::new(grid, medium, bc, pml)?)
    }

    pub fn method_spec(&self) -> Result<MethodSpec, HarnessError> {
        let mut spec = MethodSpec::new(&self.method, self.p, parse_kind(&self.transmission)?);
        spec.overlap = self.overlap;
        spec.theta = self.theta;
        Ok(spec)
    }
}

/// A run's report plus what the table needs besides it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOutcome {
    pub report: IterationReport,
    /// Fewer than ten points per wavelength.
    pub under_resolved: bool,
    pub warning: Option<String>,
    #[serde(skip)]
    pub solution: Vec<C64>,
}

/// Drive `pre` on `f` with the configured driver.
pub fn drive(pb: &Problem, pre: &Preconditioner, cfg: &ExperimentConfig, f: &[C64]) -> (Vec<C64>, IterationReport, Option<String>) {
    match (pre, cfg.driver) {
        (Preconditioner::ResidSub(rs), _) => {
            let out = rs.solve(f, cfg.tol, cfg.maxit);
            (out.u, out.report, out.warning)
        }
        (_, Driver::Richardson) => {
            let (u, r) = richardson(&pb.op, pre, f, cfg.tol, cfg.maxit, cfg.stop);
            (u, r, None)
        }
        (_, Driver::Gmres) => {
            let side = if cfg.stop == StopOn::True { Side::Right } else { Side::Left };
            let (u, r) = gmres(&pb.op, Some(pre as &dyn LinearMap), side, f, cfg.tol, cfg.maxit);
            (u, r, None)
        }
    }
}

/// Assemble, build, draw the seeded random source and iterate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    let pb = cfg.problem()?;
    let pre = build_method(&pb, &cfg.method_spec()?)?;
    let f = random_source(&pb.op, cfg.seed);
    let (solution, mut report, warning) = drive(&pb, &pre, cfg, &f);
    report.method = cfg.method.clone();
    Ok(RunOutcome { report, under_resolved: !resolution_ok(&pb.grid, &pb.medium), warning, solution })
}

/// CSV header shared by runs and tables.
pub const CSV_HEADER: &str = "method,p,alpha,outer,driver,iters,converged,final_res,wall_ms";

pub fn csv_row(cfg: &ExperimentConfig, r: &IterationReport) -> String {
    let driver = match cfg.driver {
        Driver::Richardson => "richardson",
        Driver::Gmres => "gmres",
    };
    format!(
        "{},{},{},{},{},{},{},{:e},{:.1}",
        cfg.method,
        cfg.p,
        cfg.alpha,
        cfg.outer,
        driver,
        r.table_entry(),
        r.converged,
        r.final_residual(),
        r.wall_ms
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small(method: &str, alpha: f64) -> ExperimentConfig {
        ExperimentConfig {
            nx: 15,
            ny: 15,
            base_k: vec![10.0; 4],
            delta_k: vec![0.0, 10.0, 5.0, -5.0],
            alpha,
            repeats: 1,
            outer: "robin".into(),
            setting: Setting::Guide,
            p: 4,
            method: method.into(),
            transmission: "ident-ext".into(),
            driver: Driver::Richardson,
            tol: 1e-6,
            maxit: 100,
            seed: 1,
            overlap: 0,
            theta: 0.5,
            stop: StopOn::Preconditioned,
        }
    }

    #[test]
    fn constant_medium_converges_at_once() {
        for m in ["lu-sweep", "dosm"] {
            let out = run_experiment(&small(m, 0.0)).unwrap();
            assert!(out.report.converged && out.report.iters == 1, "{m}: {:?}", out.report);
        }
    }

    #[test]
    fn vacuous_tolerance() {
        let mut cfg = small("dosm", 0.5);
        cfg.tol = 1.0;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.report.converged && out.report.iters <= 1);
    }

    #[test]
    fn resid_sub_runs_through_the_solver() {
        let mut cfg = small("resid-sub", 0.5);
        cfg.transmission = "pml:3".into();
        cfg.driver = Driver::Gmres;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.report.converged);
    }

    #[test]
    fn config_errors() {
        let mut cfg = small("dosm", 0.1);
        cfg.p = 3;
        assert!(cfg.validate().unwrap_err().is_config());
        let mut cfg = small("dosm", 0.1);
        cfg.outer = "pml:0".into();
        assert!(cfg.validate().is_err());
        let mut cfg = small("nope", 0.1);
        assert!(cfg.validate().is_err());
        cfg.method = "dosm".into();
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_json("{\"nx\": 3}").unwrap_err().is_config());
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let text = r#"{"nx":15,"ny":15,"base_k":[10,10,10,10],"delta_k":[0,10,5,-5],"alpha":0.1,
            "repeats":1,"outer":"pml:5","setting":"open","p":4,"method":"dosm","driver":"gmres"}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!((cfg.tol, cfg.maxit, cfg.transmission.as_str()), (1e-6, 100, "ident-ext"));
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn same_seed_same_row() {
        let cfg = small("dosm", 0.05);
        let a = run_experiment(&cfg).unwrap().report;
        let b = run_experiment(&cfg).unwrap().report;
        assert_eq!(a.history, b.history);
    }
}
