//! Single layer potential preconditioner: a forward sweep with Neumann
//! jump sources, one global residual, and a backward correction sweep.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Closure, PrecondError, Problem, SubdomainSolver, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::{DenseComplexMatrix, LinearMap};
use crate::partition::{PartitionKind, StripPartition};
use crate::transmission::{IfaceSide, TransmissionKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlpForm {
    /// Subdomains `[s_j, e_j]` extended by one line beyond each interface;
    /// the layer sources use the identification `I = −A` across it.
    One,
    /// Subdomains sharing their interface lines, with matching `S̃` on the
    /// two sides of every interface.
    Two,
}

#[derive(Clone, Debug)]
pub struct Slp {
    form: SlpForm,
    op: SparseOperator,
    part: StripPartition,
    solvers: Vec<SubdomainSolver>,
}

fn schur(m: Option<DenseComplexMatrix>, kind: TransmissionKind) -> Result<Closure, PrecondError> {
    m.map(Closure::Schur).ok_or_else(|| PrecondError::Invalid(format!("{kind:?} does not give a Schur block")))
}

impl Slp {
    pub fn new(pb: &Problem, part: StripPartition, kind: TransmissionKind, form: SlpForm) -> Result<Slp, PrecondError> {
        if part.kind != PartitionKind::NonOverlapping {
            return Err(PrecondError::Invalid("the single layer potential method needs a non-overlapping partition".into()));
        }
        let jc = part.count();
        let mut b = pb.builder();
        match form {
            SlpForm::Two => {
                // one operator per interface, seen from both sides
                let shared = (1..jc)
                    .map(|i| b.build_at(kind, IfaceSide::Left, part.starts[i], i).map_err(PrecondError::from).and_then(|t| schur(t.matrix, kind)))
                    .collect::<Result<Vec<_>, _>>()?;
                let left: Vec<Closure> = (0..jc).map(|j| if j == 0 { Closure::Physical } else { shared[j - 1].clone() }).collect();
                let right: Vec<Closure> = (0..jc).map(|j| if j + 1 == jc { Closure::Physical } else { shared[j].clone() }).collect();
                Slp::form2_with(&pb.op, part, left, right)
            }
            SlpForm::One => {
                let last = pb.op.n_lines() - 1;
                let mut solvers = Vec::with_capacity(jc);
                for j in 0..jc {
                    let (a, l) = if j == 0 {
                        (0, Closure::Physical)
                    } else {
                        let a = part.starts[j] - 1;
                        (a, schur(b.build_at(kind, IfaceSide::Left, a, j)?.matrix, kind)?)
                    };
                    let (z, r) = if j + 1 == jc {
                        (last, Closure::Physical)
                    } else {
                        let z = part.ends[j] + 1;
                        (z, schur(b.build_at(kind, IfaceSide::Right, z, j)?.matrix, kind)?)
                    };
                    if z < a + 3 && jc > 1 {
                        return Err(PrecondError::Invalid(format!("subdomain {j} too thin for the extra layers")));
                    }
                    solvers.push(SubdomainSolver::new(&pb.op, j, a, z, l, r)?);
                }
                Ok(Slp { form, op: pb.op.clone(), part, solvers })
            }
        }
    }

    /// Form 2 with explicit closures; every interface must carry the same
    /// `S̃` on both of its sides.
    pub fn form2_with(op: &SparseOperator, part: StripPartition, left: Vec<Closure>, right: Vec<Closure>) -> Result<Slp, PrecondError> {
        let jc = part.count();
        if left.len() != jc || right.len() != jc {
            return Err(PrecondError::Invalid(format!("need {jc} closures per side")));
        }
        for j in 0..jc.saturating_sub(1) {
            match (&right[j], &left[j + 1]) {
                (Closure::Schur(a), Closure::Schur(b)) if a == b => {}
                _ => return Err(PrecondError::Invalid(format!("interface {} does not carry matching S̃ on both sides", j + 1))),
            }
        }
        let solvers = (0..jc)
            .map(|j| SubdomainSolver::for_part(op, &part, j, &(left[j].clone(), right[j].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Slp { form: SlpForm::Two, op: op.clone(), part, solvers })
    }

    pub fn form(&self) -> SlpForm {
        self.form
    }

    pub fn solver(&self, j: usize) -> &SubdomainSolver {
        &self.solvers[j]
    }

    /// Forward sweep: the glued `v` and the residual `f̃ = f − Av`.
    pub fn forward(&self, f: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let m = self.op.m();
        let jc = self.part.count();
        let mut vs: Vec<Vec<C64>> = Vec::with_capacity(jc);
        for j in 0..jc {
            let sv = &self.solvers[j];
            let mut rhs = sv.restrict(f);
            if j > 0 {
                let pv = &self.solvers[j - 1];
                let s = self.part.starts[j];
                let c = &self.op.xcoup[s - 1];
                let (vb, va) = (pv.line(&vs[j - 1], s - 1), pv.line(&vs[j - 1], s));
                match self.form {
                    SlpForm::Two => {
                        let mut av = vec![ZERO; m];
                        self.op.line_block_apply(s, va, &mut av);
                        let row = sv.line_mut(&mut rhs, s);
                        for q in 0..m {
                            row[q] -= 2.0 * c[q] * vb[q] + av[q];
                        }
                    }
                    SlpForm::One => {
                        let jump: Vec<C64> = (0..m).map(|q| c[q] * (va[q] - vb[q])).collect();
                        sv.line_mut(&mut rhs, s - 1).copy_from_slice(&jump);
                        let row = sv.line_mut(&mut rhs, s);
                        row.iter_mut().zip(&jump).for_each(|(r, x)| *r += x);
                    }
                }
            }
            if j + 1 < jc {
                sv.line_mut(&mut rhs, sv.e).fill(ZERO);
                if self.form == SlpForm::One {
                    sv.line_mut(&mut rhs, sv.e - 1).fill(ZERO);
                }
            }
            vs.push(sv.solve(&rhs));
        }
        // v keeps [s_j, e_j), the last subdomain through the end
        let mut v = vec![ZERO; self.op.dim()];
        for (j, vj) in vs.iter().enumerate() {
            let sv = &self.solvers[j];
            let lo = self.part.starts[j];
            let hi = if j + 1 < jc { self.part.ends[j] - 1 } else { sv.e };
            for p in lo..=hi {
                v[p * m..(p + 1) * m].copy_from_slice(sv.line(vj, p));
            }
        }
        let av = self.op.mul(&v);
        let ft = f.iter().zip(&av).map(|(a, b)| a - b).collect();
        (v, ft)
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let m = self.op.m();
        let jc = self.part.count();
        let (mut u, ft) = self.forward(f);
        let mut next: Option<Vec<C64>> = None;
        for j in (0..jc.saturating_sub(1)).rev() {
            let sv = &self.solvers[j];
            let mut rhs = sv.restrict(&ft);
            if j > 0 {
                sv.line_mut(&mut rhs, sv.s).fill(ZERO);
                if self.form == SlpForm::One {
                    sv.line_mut(&mut rhs, sv.s + 1).fill(ZERO);
                }
            }
            let e = self.part.ends[j];
            let zero = vec![ZERO; m];
            match self.form {
                SlpForm::Two => {
                    let (wa, wb) = match &next {
                        Some(w) => (self.solvers[j + 1].line(w, e).to_vec(), self.solvers[j + 1].line(w, e + 1).to_vec()),
                        None => (zero.clone(), zero.clone()),
                    };
                    let mut aw = vec![ZERO; m];
                    self.op.line_block_apply(e, &wa, &mut aw);
                    let c = &self.op.xcoup[e];
                    let row = sv.line_mut(&mut rhs, e);
                    for q in 0..m {
                        row[q] -= 2.0 * c[q] * wb[q] + aw[q];
                    }
                }
                SlpForm::One => {
                    let (wa, wb) = match &next {
                        Some(w) => (self.solvers[j + 1].line(w, e).to_vec(), self.solvers[j + 1].line(w, e + 1).to_vec()),
                        None => (zero.clone(), zero.clone()),
                    };
                    let c = &self.op.xcoup[e];
                    let jump: Vec<C64> = (0..m).map(|q| c[q] * (wa[q] - wb[q])).collect();
                    sv.line_mut(&mut rhs, e + 1).copy_from_slice(&jump);
                    let row = sv.line_mut(&mut rhs, e);
                    row.iter_mut().zip(&jump).for_each(|(r, x)| *r += x);
                }
            }
            let w = sv.solve(&rhs);
            let lo = if j == 0 { 0 } else { self.part.starts[j] + 1 };
            for p in lo..=e {
                for (x, y) in u[p * m..(p + 1) * m].iter_mut().zip(sv.line(&w, p)) {
                    *x += y;
                }
            }
            next = Some(w);
        }
        u
    }
}

impl LinearMap for Slp {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        Slp::apply(self, x)
    }
}
