//! Direct solves written out as field CSVs for offline plotting.

use num_complex::Complex64 as C64;

use super::{ExperimentConfig, HarnessError};
use crate::assembly::{dump_field, point_source, random_source, SparseOperator};
use crate::linalg::block_tridiag_factor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceSpec {
    /// Unit source at physical grid point `(i, j)`.
    Point(i64, i64),
    Random(u64),
}

/// `point:i,j` or `random:seed`.
pub fn parse_source(s: &str) -> Result<SourceSpec, HarnessError> {
    let bad = || HarnessError::Config(format!("source must be point:i,j or random:seed, got `{s}`"));
    if let Some(rest) = s.strip_prefix("point:") {
        let (i, j) = rest.split_once(',').ok_or_else(bad)?;
        return Ok(SourceSpec::Point(i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?));
    }
    let seed = s.strip_prefix("random:").ok_or_else(bad)?;
    Ok(SourceSpec::Random(seed.trim().parse().map_err(|_| bad())?))
}

pub fn source_vector(op: &SparseOperator, src: SourceSpec) -> Result<Vec<C64>, HarnessError> {
    match src {
        SourceSpec::Point(i, j) => point_source(op, i, j).map_err(|e| HarnessError::Config(e.to_string())),
        SourceSpec::Random(seed) => Ok(random_source(op, seed)),
    }
}

/// Solve the configured problem directly and render the field.
pub fn dump_solution(cfg: &ExperimentConfig, src: SourceSpec, include_pml: bool) -> Result<(Vec<C64>, String), HarnessError> {
    let pb = cfg.problem()?;
    let f = source_vector(&pb.op, src)?;
    let lu = block_tridiag_factor(&pb.op.to_block_system()).map_err(|e| HarnessError::Config(format!("singular problem: {e}")))?;
    let u = lu.solve(&f);
    let text = dump_field(&pb.op, &u, include_pml).map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok((u, text))
}
