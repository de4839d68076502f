//! DOSM in substructured form: the iteration acts on interface data
//! `λ_⟩` only, and the subdomain solutions are recovered from it.

use num_complex::Complex64 as C64;

use super::{trace, Closure, Dosm, DosmIterates, SubdomainSolver, ZERO};
use crate::linalg::{gmres, IterationReport, LinearMap, Side};
use crate::transmission::IfaceSide;

/// Interface data for one end of a subdomain: what the transmission row
/// adds to `f` (Schur closure) or its prescribed value (Dirichlet closure).
fn lambda(op: &crate::assembly::SparseOperator, sv: &SubdomainSolver, side: IfaceSide, nb: super::Trace<'_>) -> Vec<C64> {
    sv.row_data(op, side, &vec![ZERO; sv.m], Some(nb))
}

/// Local right-hand side `R_j f` with the end rows carrying `λ`.
fn with_lambda(sv: &SubdomainSolver, mut rhs: Vec<C64>, left: Option<&[C64]>, right: Option<&[C64]>) -> Vec<C64> {
    for (closure, p, lam) in [(&sv.left, sv.s, left), (&sv.right, sv.e, right)] {
        let row = sv.line_mut(&mut rhs, p);
        match closure {
            Closure::Physical => {}
            Closure::Schur(_) => {
                if let Some(l) = lam {
                    row.iter_mut().zip(l).for_each(|(r, l)| *r += l);
                }
            }
            Closure::Dirichlet => match lam {
                Some(l) => row.copy_from_slice(l),
                None => row.fill(ZERO),
            },
        }
    }
    rhs
}

#[derive(Clone, Debug)]
pub struct SubstructuredDosm {
    dosm: Dosm,
}

/// Result of one substructured double sweep.
#[derive(Clone, Debug)]
pub struct SubstructuredStep {
    /// `λ_{j⟩}` for `j = 0..J−2`, each one gridline long.
    pub lambda: Vec<Vec<C64>>,
    pub iterates: DosmIterates,
}

impl SubstructuredDosm {
    pub fn new(dosm: Dosm) -> SubstructuredDosm {
        SubstructuredDosm { dosm }
    }

    pub fn dosm(&self) -> &Dosm {
        &self.dosm
    }

    /// Length of the flattened trace vector.
    pub fn trace_dim(&self) -> usize {
        self.dosm.partition().count().saturating_sub(1) * self.dosm.operator().m()
    }

    /// `λ_⟩` that reproduces a DOSM iterate `u` as previous data: the
    /// forward right rows read it from the neighbour on the right.
    pub fn lambda_of(&self, u: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let jc = self.dosm.partition().count();
        let op = self.dosm.operator();
        (0..jc.saturating_sub(1))
            .map(|j| {
                let sv = self.dosm.forward_solver(j);
                lambda(op, sv, IfaceSide::Right, trace(self.dosm.backward_solver(j + 1), &u[j + 1], sv.e + 1, sv.e))
            })
            .collect()
    }

    /// One double sweep `λ^{(n−1)} ↦ λ^{(n)}`.
    pub fn step(&self, f: &[C64], lam: &[Vec<C64>]) -> SubstructuredStep {
        let d = &self.dosm;
        let op = d.operator();
        let jc = d.partition().count();
        let mut half: Vec<Vec<C64>> = Vec::with_capacity(jc.saturating_sub(1));
        // left data produced by the forward sweep, one per closure family
        let mut left_f: Vec<Option<Vec<C64>>> = vec![None; jc];
        let mut left_b: Vec<Option<Vec<C64>>> = vec![None; jc];
        for j in 0..jc.saturating_sub(1) {
            let sv = d.forward_solver(j);
            let rhs = with_lambda(sv, sv.restrict(f), left_f[j].as_deref(), Some(&lam[j]));
            let v = sv.solve(&rhs);
            let s = d.backward_solver(j + 1).s;
            if j + 2 < jc {
                left_f[j + 1] = Some(lambda(op, d.forward_solver(j + 1), IfaceSide::Left, trace(sv, &v, s - 1, s)));
            }
            left_b[j + 1] = Some(lambda(op, d.backward_solver(j + 1), IfaceSide::Left, trace(sv, &v, s - 1, s)));
            half.push(v);
        }
        let mut full: Vec<Vec<C64>> = vec![Vec::new(); jc];
        let mut right: Option<Vec<C64>> = None;
        for j in (0..jc).rev() {
            let sv = d.backward_solver(j);
            let rhs = with_lambda(sv, sv.restrict(f), left_b[j].as_deref(), right.as_deref());
            let u = sv.solve(&rhs);
            if j > 0 {
                let nb = d.backward_solver(j - 1);
                right = Some(lambda(op, nb, IfaceSide::Right, trace(sv, &u, nb.e + 1, nb.e)));
            }
            full[j] = u;
        }
        let iterates = DosmIterates { half, full };
        SubstructuredStep { lambda: self.lambda_of(&iterates.full), iterates }
    }

    fn flat_step(&self, f: &[C64], lam: &[C64]) -> Vec<C64> {
        let m = self.dosm.operator().m();
        let parts: Vec<Vec<C64>> = lam.chunks(m).map(<[C64]>::to_vec).collect();
        self.step(f, &parts).lambda.concat()
    }

    /// GMRES on `(I − F)λ = g` where `λ ↦ Fλ + g` is one double sweep, then
    /// one more sweep to recover the subdomain solutions.
    pub fn solve(&self, f: &[C64], tol: f64, maxit: usize) -> (DosmIterates, IterationReport) {
        let n = self.trace_dim();
        let zero_f = vec![ZERO; f.len()];
        let g = self.flat_step(f, &vec![ZERO; n]);
        let a = (n, |x: &[C64]| {
            let fx = self.flat_step(&zero_f, x);
            x.iter().zip(&fx).map(|(a, b)| a - b).collect::<Vec<C64>>()
        });
        let (lam, report) = if n == 0 {
            (Vec::new(), IterationReport { method: "gmres".into(), iters: 0, converged: true, diverged: false, history: vec![0.0], wall_ms: 0.0 })
        } else {
            gmres(&a, None, Side::Left, &g, tol, maxit)
        };
        let m = self.dosm.operator().m();
        let parts: Vec<Vec<C64>> = lam.chunks(m).map(<[C64]>::to_vec).collect();
        (self.step(f, &parts).iterates, report)
    }

    /// One sweep from `λ = 0`, glued: the same map as DOSM from a zero guess.
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let zero = vec![vec![ZERO; self.dosm.operator().m()]; self.dosm.partition().count().saturating_sub(1)];
        self.dosm.glue(&self.step(f, &zero).iterates.full)
    }
}

impl LinearMap for SubstructuredDosm {
    fn dim(&self) -> usize {
        self.dosm.operator().dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        SubstructuredDosm::apply(self, x)
    }
}
