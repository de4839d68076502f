use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::dense::{dot, norm2};

/// Anything that maps a vector to a vector linearly: the system matrix,
/// a preconditioner, or a trace-space iteration.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
}

impl<F: Fn(&[C64]) -> Vec<C64>> LinearMap for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (self.1)(x)
    }
}

pub struct Identity(pub usize);

impl LinearMap for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        x.to_vec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Which residual decides convergence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopOn {
    /// `‖M⁻¹(b − Ax)‖ / ‖M⁻¹b‖`
    Preconditioned,
    /// `‖b − Ax‖ / ‖b‖`
    True,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub method: String,
    pub iters: usize,
    pub converged: bool,
    pub diverged: bool,
    /// Relative residual after each iteration, starting with 1 at iteration 0.
    pub history: Vec<f64>,
    pub wall_ms: f64,
}

impl IterationReport {
    pub fn final_residual(&self) -> f64 {
        *self.history.last().unwrap_or(&0.0)
    }

    /// Table rendering: the count when converged, `-` otherwise.
    pub fn table_entry(&self) -> String {
        if self.converged {
            self.iters.to_string()
        } else {
            "-".to_string()
        }
    }
}

/// Relative residual beyond which a stationary iteration is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e6;

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Stationary iteration `x ← x + M⁻¹(b − Ax)` from `x = 0`.
pub fn richardson(
    a: &dyn LinearMap,
    m: &dyn LinearMap,
    b: &[C64],
    tol: f64,
    maxit: usize,
    stop: StopOn,
) -> (Vec<C64>, IterationReport) {
    let start = Instant::now();
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side has the wrong length");
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut history = vec![1.0];
    let mut z = m.apply(b);
    let norm0 = match stop {
        StopOn::Preconditioned => norm2(&z),
        StopOn::True => norm2(b),
    };
    let mut report = IterationReport {
        method: "richardson".into(),
        iters: 0,
        converged: norm0 == 0.0,
        diverged: false,
        history: vec![],
        wall_ms: 0.0,
    };
    if norm0 > 0.0 {
        for it in 1..=maxit {
            for (xi, zi) in x.iter_mut().zip(&z) {
                *xi += zi;
            }
            let r = sub(b, &a.apply(&x));
            z = m.apply(&r);
            let rel = match stop {
                StopOn::Preconditioned => norm2(&z),
                StopOn::True => norm2(&r),
            } / norm0;
            history.push(rel);
            report.iters = it;
            if rel <= tol {
                report.converged = true;
                break;
            }
            if !rel.is_finite() || rel > DIVERGENCE_GUARD {
                report.diverged = true;
                break;
            }
        }
    }
    report.history = history;
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    (x, report)
}

/// Full (unrestarted) GMRES with modified Gram–Schmidt and Givens rotations.
/// Left preconditioning monitors `‖M⁻¹r‖`, right preconditioning `‖r‖`.
pub fn gmres(
    a: &dyn LinearMap,
    m: Option<&dyn LinearMap>,
    side: Side,
    b: &[C64],
    tol: f64,
    maxit: usize,
) -> (Vec<C64>, IterationReport) {
    let start = Instant::now();
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side has the wrong length");
    let precond = |v: &[C64]| match m {
        Some(m) => m.apply(v),
        None => v.to_vec(),
    };
    let operator = |v: &[C64]| match side {
        Side::Left => precond(&a.apply(v)),
        Side::Right => a.apply(&precond(v)),
    };
    let r0 = match side {
        Side::Left => precond(b),
        Side::Right => b.to_vec(),
    };
    let beta = norm2(&r0);
    let mut report = IterationReport {
        method: format!("gmres-{}", if side == Side::Left { "left" } else { "right" }),
        iters: 0,
        converged: beta == 0.0,
        diverged: false,
        history: vec![1.0],
        wall_ms: 0.0,
    };
    if beta == 0.0 {
        report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        return (vec![C64::new(0.0, 0.0); n], report);
    }
    let mut basis: Vec<Vec<C64>> = vec![r0.iter().map(|v| v / beta).collect()];
    // Hessenberg columns, already rotated
    let mut hcols: Vec<Vec<C64>> = Vec::new();
    let mut cs: Vec<C64> = Vec::new();
    let mut sn: Vec<C64> = Vec::new();
    let mut g = vec![C64::new(beta, 0.0)];
    let maxit = maxit.min(n);
    for k in 0..maxit {
        let mut w = operator(&basis[k]);
        let mut h = vec![C64::new(0.0, 0.0); k + 2];
        for (i, q) in basis.iter().enumerate() {
            let hij = dot_conj(q, &w);
            h[i] = hij;
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= hij * qi;
            }
        }
        let hnext = norm2(&w);
        h[k + 1] = C64::new(hnext, 0.0);
        for i in 0..k {
            let t = cs[i].conj() * h[i] + sn[i].conj() * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        let (c, s) = givens(h[k], h[k + 1]);
        h[k] = c.conj() * h[k] + s.conj() * h[k + 1];
        h[k + 1] = C64::new(0.0, 0.0);
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c.conj() * gk;
        g.push(-s * gk);
        hcols.push(h);
        let rel = g[k + 1].norm() / beta;
        report.history.push(rel);
        report.iters = k + 1;
        let happy = hnext <= 1e-14 * beta;
        if rel <= tol || happy {
            report.converged = rel <= tol || happy;
            break;
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }
    // back substitution on the rotated Hessenberg triangle
    let kdim = hcols.len();
    let mut y = vec![C64::new(0.0, 0.0); kdim];
    for i in (0..kdim).rev() {
        let mut s = g[i];
        for j in i + 1..kdim {
            s -= hcols[j][i] * y[j];
        }
        y[i] = s / hcols[i][i];
    }
    let mut z = vec![C64::new(0.0, 0.0); n];
    for (j, yj) in y.iter().enumerate() {
        for (zi, qi) in z.iter_mut().zip(&basis[j]) {
            *zi += yj * qi;
        }
    }
    let x = match side {
        Side::Left => z,
        Side::Right => precond(&z),
    };
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    (x, report)
}

/// `qᴴ w`.
fn dot_conj(q: &[C64], w: &[C64]) -> C64 {
    let qc: Vec<C64> = q.iter().map(|v| v.conj()).collect();
    dot(&qc, w)
}

/// Rotation with `c̄·a + s̄·b = r`, `−s·a + c·b = 0`.
fn givens(a: C64, b: C64) -> (C64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    }
    let r = na.hypot(nb);
    let c = na / r;
    (C64::new(c, 0.0), b * c / a)
}
