//! Optimized Schwarz with global transmission: after one round of
//! independent solves every subdomain sends the trace of its field to every
//! other subdomain, adjacent or not, and a second round finishes the job.

use num_complex::Complex64 as C64;

use super::{closures, Closure, PrecondError, Problem, SubdomainSolver, Trace, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::LinearMap;
use crate::partition::{Direction, PartitionKind, StripPartition, WeightingOperator};
use crate::transmission::{IfaceSide, TransmissionKind};

/// Incoming data of one subdomain: what its left and right transmission
/// rows add to the source.
pub type IfaceData = (Option<Vec<C64>>, Option<Vec<C64>>);

#[derive(Clone, Debug)]
pub struct GlobalOsm {
    op: SparseOperator,
    solvers: Vec<SubdomainSolver>,
    /// Homogeneous problems on the lines left of `s_j` and right of `e_j`
    /// with the Dirichlet trace of `Ω_j` prescribed on `s_j`, `e_j`.
    left_ext: Vec<Option<SubdomainSolver>>,
    right_ext: Vec<Option<SubdomainSolver>>,
    split: WeightingOperator,
}

impl GlobalOsm {
    /// `kind` closes every subdomain on both sides; only `Exact` makes the
    /// closures transparent.
    pub fn new(pb: &Problem, part: &StripPartition, kind: TransmissionKind) -> Result<GlobalOsm, PrecondError> {
        if part.kind != PartitionKind::NonOverlapping {
            return Err(PrecondError::Invalid("the global method is built on non-overlapping strips".into()));
        }
        let cl = closures(&mut pb.builder(), part, kind, kind)?;
        if cl.iter().any(|(l, r)| l.is_dirichlet() || r.is_dirichlet()) {
            return Err(PrecondError::Invalid(format!("{kind:?} gives no Schur block")));
        }
        let jc = part.count();
        let last = pb.op.n_lines() - 1;
        let mut solvers = Vec::with_capacity(jc);
        let mut left_ext = Vec::with_capacity(jc);
        let mut right_ext = Vec::with_capacity(jc);
        for j in 0..jc {
            let (s, e) = (part.starts[j], part.ends[j]);
            solvers.push(SubdomainSolver::for_part(&pb.op, part, j, &cl[j])?);
            left_ext.push((j > 0).then(|| SubdomainSolver::new(&pb.op, j, 0, s, Closure::Physical, Closure::Dirichlet)).transpose()?);
            right_ext.push((j + 1 < jc).then(|| SubdomainSolver::new(&pb.op, j, e, last, Closure::Dirichlet, Closure::Physical)).transpose()?);
        }
        Ok(GlobalOsm { op: pb.op.clone(), solvers, left_ext, right_ext, split: part.weighting(Direction::Backward) })
    }

    pub fn count(&self) -> usize {
        self.solvers.len()
    }

    /// Each source line goes to exactly one subdomain.
    fn local_source(&self, j: usize, f: &[C64]) -> Vec<C64> {
        self.split.apply_local(j, &self.solvers[j].restrict(f))
    }

    fn solve(&self, j: usize, fj: Vec<C64>, data: &IfaceData) -> Vec<C64> {
        let sv = &self.solvers[j];
        let mut r = fj;
        for (p, d) in [(sv.s, &data.0), (sv.e, &data.1)] {
            if let Some(d) = d {
                sv.line_mut(&mut r, p).iter_mut().zip(d).for_each(|(x, y)| *x += y);
            }
        }
        sv.solve(&r)
    }

    /// The field stimulated by the source of `Ω_j` on the whole domain,
    /// recovered from `v` on `Ω_j` by the exterior solves.
    fn extend(&self, j: usize, v: &[C64]) -> Vec<C64> {
        let m = self.op.m();
        let sv = &self.solvers[j];
        let mut w = vec![ZERO; self.op.dim()];
        w[sv.s * m..(sv.e + 1) * m].copy_from_slice(v);
        if let Some(x) = &self.left_ext[j] {
            let mut r = vec![ZERO; x.dim()];
            x.line_mut(&mut r, sv.s).copy_from_slice(sv.line(v, sv.s));
            let y = x.solve(&r);
            w[..sv.s * m].copy_from_slice(&y[..sv.s * m]);
        }
        if let Some(x) = &self.right_ext[j] {
            let mut r = vec![ZERO; x.dim()];
            x.line_mut(&mut r, sv.e).copy_from_slice(sv.line(v, sv.e));
            let y = x.solve(&r);
            w[(sv.e + 1) * m..].copy_from_slice(&y[m..]);
        }
        w
    }

    /// First phase and the all-to-all exchange: `v^{(1/2)}_j` and
    /// `data[l][j] = λ_{l,j}`, the transmission data the source of `Ω_j`
    /// induces on the rows of `Ω_l`.
    pub fn exchange(&self, f: &[C64]) -> (Vec<Vec<C64>>, Vec<Vec<IfaceData>>) {
        let m = self.op.m();
        let jc = self.count();
        let none: IfaceData = (None, None);
        let half: Vec<Vec<C64>> = (0..jc).map(|j| self.solve(j, self.local_source(j, f), &none)).collect();
        let mut data = vec![vec![none.clone(); jc]; jc];
        for (j, v) in half.iter().enumerate() {
            let w = self.extend(j, v);
            let mut fj = vec![ZERO; self.op.dim()];
            self.solvers[j].extend_add(&self.local_source(j, f), &mut fj);
            let line = |p: usize| &w[p * m..(p + 1) * m];
            for (l, sv) in self.solvers.iter().enumerate().filter(|(l, _)| *l != j) {
                // a source of Ω_j on a shared line enters the row of Ω_l too
                let row = |side, p: usize, beyond: usize| {
                    sv.row_data(&self.op, side, &fj[p * m..(p + 1) * m], Some(Trace { beyond: line(beyond), at: line(p) }))
                };
                let left = (l > 0).then(|| row(IfaceSide::Left, sv.s, sv.s - 1));
                let right = (l + 1 < jc).then(|| row(IfaceSide::Right, sv.e, sv.e + 1));
                data[l][j] = (left, right);
            }
        }
        (half, data)
    }

    /// Second phase from the exchanged data.
    pub fn finish(&self, f: &[C64], data: &[Vec<IfaceData>]) -> Vec<Vec<C64>> {
        let m = self.op.m();
        (0..self.count())
            .map(|l| {
                let sum = |pick: fn(&IfaceData) -> &Option<Vec<C64>>| {
                    let mut acc: Option<Vec<C64>> = None;
                    for d in data[l].iter().filter_map(|d| pick(d).as_ref()) {
                        let a = acc.get_or_insert_with(|| vec![ZERO; m]);
                        a.iter_mut().zip(d).for_each(|(x, y)| *x += y);
                    }
                    acc
                };
                self.solve(l, self.local_source(l, f), &(sum(|d| &d.0), sum(|d| &d.1)))
            })
            .collect()
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let (_, data) = self.exchange(f);
        self.split.glue(&self.finish(f, &data), self.op.dim())
    }
}

impl LinearMap for GlobalOsm {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        GlobalOsm::apply(self, x)
    }
}
