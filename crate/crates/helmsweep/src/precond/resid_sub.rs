//! Residual substructuring: when `M⁻¹` leaves a residual supported on a few
//! rows only, right preconditioned GMRES runs on those rows alone.

use num_complex::Complex64 as C64;

use super::ZERO;
use crate::assembly::{random_source, SparseOperator};
use crate::linalg::{gmres, IterationReport, LinearMap, Side};

/// Rows below this fraction of `‖f‖_∞` count as structurally zero.
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ResidualSubstructuring<M> {
    op: SparseOperator,
    inner: M,
    rows: Vec<usize>,
}

/// Outcome of one reduced solve.
#[derive(Clone, Debug)]
pub struct ReducedSolve {
    pub u: Vec<C64>,
    pub report: IterationReport,
    pub reduced_dim: usize,
    /// Set when the residual support covered every row and full GMRES ran.
    pub warning: Option<String>,
}

/// Rows where `f − AM⁻¹f` is nonzero for some random probe `f`.
pub fn residual_support(op: &SparseOperator, inner: &dyn LinearMap, probes: usize, seed: u64) -> Vec<usize> {
    let n = op.dim();
    let mut hit = vec![false; n];
    for k in 0..probes {
        let f = random_source(op, seed.wrapping_add(k as u64));
        let fmax = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let amf = op.mul(&inner.apply(&f));
        for (i, h) in hit.iter_mut().enumerate() {
            if (f[i] - amf[i]).norm() > SUPPORT_TOL * fmax {
                *h = true;
            }
        }
    }
    (0..n).filter(|&i| hit[i]).collect()
}

impl<M: LinearMap> ResidualSubstructuring<M> {
    /// Detects the residual rows of `inner` with three random probes.
    pub fn new(op: &SparseOperator, inner: M) -> ResidualSubstructuring<M> {
        let rows = residual_support(op, &inner, 3, 0x5eed);
        ResidualSubstructuring { op: op.clone(), inner, rows }
    }

    /// The rows kept by `R_r`, ascending.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    fn extend(&self, r: &[C64]) -> Vec<C64> {
        let mut x = vec![ZERO; self.op.dim()];
        for (&i, v) in self.rows.iter().zip(r) {
            x[i] = *v;
        }
        x
    }

    pub fn solve(&self, f: &[C64], tol: f64, maxit: usize) -> ReducedSolve {
        let n = self.op.dim();
        if self.rows.len() == n {
            let (u, report) = gmres(&self.op, Some(&self.inner), Side::Right, f, tol, maxit);
            let warning = Some("residual support covers every row; ran full GMRES".to_string());
            return ReducedSolve { u, report, reduced_dim: n, warning };
        }
        let u0 = self.inner.apply(f);
        if self.rows.is_empty() {
            let report = IterationReport { method: "gmres".into(), iters: 0, converged: true, diverged: false, history: vec![0.0], wall_ms: 0.0 };
            return ReducedSolve { u: u0, report, reduced_dim: 0, warning: None };
        }
        let au0 = self.op.mul(&u0);
        let h: Vec<C64> = self.rows.iter().map(|&i| f[i] - au0[i]).collect();
        let reduced = (self.rows.len(), |x: &[C64]| {
            let y = self.op.mul(&self.inner.apply(&self.extend(x)));
            self.rows.iter().map(|&i| y[i]).collect::<Vec<C64>>()
        });
        let (r, report) = gmres(&reduced, None, Side::Left, &h, tol, maxit);
        let mut u = self.inner.apply(&self.extend(&r));
        u.iter_mut().zip(&u0).for_each(|(a, b)| *a += b);
        ReducedSolve { u, report, reduced_dim: self.rows.len(), warning: None }
    }
}

/// One-shot form: detect the support of `inner`, then solve.
pub fn residual_substructure_solve(op: &SparseOperator, inner: &dyn LinearMap, f: &[C64], tol: f64, maxit: usize) -> ReducedSolve {
    ResidualSubstructuring::new(op, inner).solve(f, tol, maxit)
}

impl<M: LinearMap + ?Sized> LinearMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (**self).apply(x)
    }
}
