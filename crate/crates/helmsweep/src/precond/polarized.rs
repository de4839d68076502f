//! Polarized traces: Dirichlet and Neumann interface traces of the
//! right-going and left-going waves are propagated by matrix potentials of
//! independent subdomain problems, then the interiors are recovered.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Closure, PrecondError, Problem, SubdomainSolver, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::LinearMap;
use crate::partition::{PartitionKind, StripPartition};
use crate::transmission::{IfaceSide, TransmissionKind};

/// Splitting of every interface line block `A_p = A^⟨_p + A^⟩_p` with
/// `A^⟨_p = θ A_p`; `A^⟨_p` is the share of the subdomain to the right.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    pub theta: f64,
}

impl Default for Splitting {
    fn default() -> Self {
        Splitting { theta: 0.5 }
    }
}

/// Dirichlet and Neumann traces on one interface line.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePair {
    pub dirichlet: Vec<C64>,
    pub neumann: Vec<C64>,
}

/// All traces of one application: `left[j]` lives on `s_j` as seen from
/// `Ω_{j−1}`, `right[j]` on `e_j` as seen from `Ω_{j+1}`.
#[derive(Clone, Debug)]
pub struct PolarizedState {
    pub left: Vec<Option<TracePair>>,
    pub right: Vec<Option<TracePair>>,
    pub v0: Vec<Vec<C64>>,
    /// Recovered subdomain vectors; only the interior lines are meaningful.
    pub v: Vec<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct PolarizedTraces {
    op: SparseOperator,
    part: StripPartition,
    solvers: Vec<SubdomainSolver>,
    split: Splitting,
}

impl PolarizedTraces {
    /// `kind` closes both ends of every subdomain; the PML is the method's
    /// own choice, other kinds are accepted for experiments.
    pub fn new(pb: &Problem, part: StripPartition, kind: TransmissionKind, split: Splitting) -> Result<PolarizedTraces, PrecondError> {
        if part.kind != PartitionKind::NonOverlapping {
            return Err(PrecondError::Invalid("polarized traces need a non-overlapping partition".into()));
        }
        let jc = part.count();
        let mut b = pb.builder();
        let mut solvers = Vec::with_capacity(jc);
        for j in 0..jc {
            if jc > 1 && part.ends[j] - part.starts[j] < 2 {
                return Err(PrecondError::Invalid(format!("subdomain {j} has no interior line")));
            }
            let l = if j == 0 { Closure::Physical } else { Closure::from_interface(&b.build(kind, &part, j, IfaceSide::Left)?) };
            let r = if j + 1 == jc { Closure::Physical } else { Closure::from_interface(&b.build(kind, &part, j, IfaceSide::Right)?) };
            if l.is_dirichlet() || r.is_dirichlet() {
                return Err(PrecondError::Invalid(format!("{kind:?} gives no Schur block")));
            }
            solvers.push(SubdomainSolver::for_part(&pb.op, &part, j, &(l, r))?);
        }
        Ok(PolarizedTraces { op: pb.op.clone(), part, solvers, split })
    }

    pub fn splitting(&self) -> Splitting {
        self.split
    }

    pub fn solver(&self, j: usize) -> &SubdomainSolver {
        &self.solvers[j]
    }

    /// `θ A_p x` or `(1 − θ) A_p x`.
    fn part_of_line(&self, p: usize, inner_left: bool, x: &[C64]) -> Vec<C64> {
        let w = if inner_left { self.split.theta } else { 1.0 - self.split.theta };
        let mut y = vec![ZERO; x.len()];
        self.op.line_block_apply(p, x, &mut y);
        y.iter_mut().for_each(|v| *v *= w);
        y
    }

    /// Local layer data whose image under `G^{(j)}` is the single layer
    /// potential of `λ^N` minus the double layer potential of `λ^D` on the
    /// given end of `Ω_j`.
    fn layer_rhs(&self, sv: &SubdomainSolver, side: IfaceSide, tp: &TracePair, out: &mut [C64]) {
        let (p, inner, c) = match side {
            IfaceSide::Left => (sv.s, sv.s + 1, &self.op.xcoup[sv.s]),
            IfaceSide::Right => (sv.e, sv.e - 1, &self.op.xcoup[sv.e - 1]),
        };
        let a = self.part_of_line(p, side == IfaceSide::Left, &tp.dirichlet);
        let row = sv.line_mut(out, p);
        for q in 0..sv.m {
            row[q] += tp.neumann[q] - a[q];
        }
        let row = sv.line_mut(out, inner);
        for q in 0..sv.m {
            row[q] -= c[q] * tp.dirichlet[q];
        }
    }

    /// `v⁰_j` plus the layer potentials of the given traces.
    fn represent(&self, j: usize, v0: &[C64], left: Option<&TracePair>, right: Option<&TracePair>) -> Vec<C64> {
        let sv = &self.solvers[j];
        if left.is_none() && right.is_none() {
            return v0.to_vec();
        }
        let mut r = vec![ZERO; sv.dim()];
        if let Some(t) = left {
            self.layer_rhs(sv, IfaceSide::Left, t, &mut r);
        }
        if let Some(t) = right {
            self.layer_rhs(sv, IfaceSide::Right, t, &mut r);
        }
        let mut w = sv.solve(&r);
        w.iter_mut().zip(v0).for_each(|(a, b)| *a += b);
        w
    }

    /// Traces handed across line `p` by the represented field `w` of the
    /// neighbour; `beyond` is the neighbour's line next to `p`.
    fn hand_over(&self, sv: &SubdomainSolver, w: &[C64], p: usize, beyond: usize, inner_left: bool) -> TracePair {
        let d = sv.line(w, p).to_vec();
        let c = &self.op.xcoup[p.min(beyond)];
        let a = self.part_of_line(p, !inner_left, &d);
        let nb = sv.line(w, beyond);
        let neumann = (0..sv.m).map(|q| -a[q] - c[q] * nb[q]).collect();
        TracePair { dirichlet: d, neumann }
    }

    pub fn run(&self, f: &[C64]) -> PolarizedState {
        let jc = self.solvers.len();
        let v0: Vec<Vec<C64>> = self.solvers.iter().map(|sv| sv.solve(&sv.restrict(f))).collect();
        let mut left: Vec<Option<TracePair>> = vec![None; jc];
        for j in 1..jc {
            let w = self.represent(j - 1, &v0[j - 1], left[j - 1].as_ref(), None);
            let sv = &self.solvers[j - 1];
            left[j] = Some(self.hand_over(sv, &w, sv.e, sv.e - 1, true));
        }
        // independent of the forward recursion
        let mut right: Vec<Option<TracePair>> = vec![None; jc];
        for j in (0..jc.saturating_sub(1)).rev() {
            let w = self.represent(j + 1, &v0[j + 1], None, right[j + 1].as_ref());
            let sv = &self.solvers[j + 1];
            right[j] = Some(self.hand_over(sv, &w, sv.s, sv.s + 1, false));
        }
        let v = (0..jc).map(|j| self.represent(j, &v0[j], left[j].as_ref(), right[j].as_ref())).collect();
        PolarizedState { left, right, v0, v }
    }

    /// `λ^D_{j⟨}` on `s_j` and `v_{j•}` on the remaining lines of `Ω_j`
    /// except `e_j`, which belongs to the next subdomain.
    pub fn glue(&self, st: &PolarizedState) -> Vec<C64> {
        let m = self.op.m();
        let jc = self.solvers.len();
        let mut out = vec![ZERO; self.op.dim()];
        for (j, sv) in self.solvers.iter().enumerate() {
            let hi = if j + 1 == jc { sv.e } else { sv.e - 1 };
            for p in sv.s..=hi {
                let src = match (&st.left[j], p == sv.s) {
                    (Some(t), true) => &t.dirichlet[..],
                    _ => sv.line(&st.v[j], p),
                };
                out[p * m..(p + 1) * m].copy_from_slice(src);
            }
        }
        out
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        self.glue(&self.run(f))
    }

    pub fn partition(&self) -> &StripPartition {
        &self.part
    }
}

impl LinearMap for PolarizedTraces {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        PolarizedTraces::apply(self, x)
    }
}
