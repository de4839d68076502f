//! Source transfer: each forward solve hands the next subdomain the source
//! that reproduces its damped solution inside the shared overlap.

use num_complex::Complex64 as C64;

use super::{Closure, PrecondError, Problem, SubdomainSolver, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::LinearMap;
use crate::partition::{Direction, PartitionKind, StripPartition, WeightingOperator};
use crate::transmission::{IfaceSide, TransmissionKind};

#[derive(Clone, Debug)]
pub struct SourceTransfer {
    op: SparseOperator,
    part: StripPartition,
    fwd: Vec<SubdomainSolver>,
    bwd: Vec<SubdomainSolver>,
    damping: Vec<Vec<f64>>,
    glue: WeightingOperator,
}

/// Check the four damping constraints: `D_j` vanishes on the right
/// interface and on the line coupled to it, and is the identity on the
/// left overlap boundary `s_{j+1}` and the line coupled to it.
pub fn check_damping(op: &SparseOperator, part: &StripPartition, j: usize, d: &[f64]) -> bool {
    let (s, e) = (part.starts[j], part.ends[j]);
    let c = part.starts[j + 1];
    let at = |p: usize| d[p - s];
    let nz = |p: usize| op.xcoup[p].iter().any(|x| *x != ZERO);
    at(e) == 0.0 && (!nz(e - 1) || at(e - 1) == 0.0) && at(c) == 1.0 && (!nz(c) || at(c + 1) == 1.0)
}

impl SourceTransfer {
    /// `kind` closes every interface of the forward sweep and the left
    /// interfaces of the backward sweep; PML is the classical choice.
    pub fn new(pb: &Problem, part: StripPartition, kind: TransmissionKind) -> Result<SourceTransfer, PrecondError> {
        if part.kind != PartitionKind::SourceTransfer {
            return Err(PrecondError::Invalid("source transfer needs the contacting-overlap layout".into()));
        }
        let jc = part.count();
        let mut b = pb.builder();
        let mut fwd = Vec::new();
        let mut bwd = Vec::new();
        let mut damping = Vec::new();
        for j in 0..jc {
            let left = if j == 0 { Closure::Physical } else { Closure::from_interface(&b.build(kind, &part, j, IfaceSide::Left)?) };
            let last = j + 1 == jc;
            if !last {
                let right = Closure::from_interface(&b.build(kind, &part, j, IfaceSide::Right)?);
                fwd.push(SubdomainSolver::for_part(&pb.op, &part, j, &(left.clone(), right))?);
                let dj = part.source_transfer_damping(j);
                if !check_damping(&pb.op, &part, j, &dj) {
                    return Err(PrecondError::Invalid(format!("overlap of subdomain {j} too thin for the damping")));
                }
                damping.push(dj);
            }
            let right = if last { Closure::Physical } else { Closure::Dirichlet };
            bwd.push(SubdomainSolver::for_part(&pb.op, &part, j, &(left, right))?);
        }
        let glue = part.weighting(Direction::Backward);
        Ok(SourceTransfer { op: pb.op.clone(), part, fwd, bwd, damping, glue })
    }

    pub fn damping(&self, j: usize) -> &[f64] {
        &self.damping[j]
    }

    pub fn partition(&self) -> &StripPartition {
        &self.part
    }

    /// Local right-hand side on `Ω_j`: `f̃` on the open left overlap (all of
    /// it up to `s_{j+1}` for the first subdomain), `f` on `s_{j+1}`, and `f`
    /// on the open right overlap only when `full_right`.
    fn local_rhs(&self, sv: &SubdomainSolver, f: &[C64], ft: &[C64], full_right: bool) -> Vec<C64> {
        let m = self.op.m();
        let jc = self.part.count();
        // separator s_{j+1} inside Ω_j; a lone subdomain has none
        let c = if sv.j + 1 < jc {
            self.part.starts[sv.j + 1]
        } else if sv.j > 0 {
            self.part.ends[sv.j - 1]
        } else {
            return sv.restrict(f);
        };
        let mut r = vec![ZERO; sv.dim()];
        let first = if sv.j == 0 { sv.s } else { sv.s + 1 };
        for p in first..c {
            sv.line_mut(&mut r, p).copy_from_slice(&ft[p * m..(p + 1) * m]);
        }
        let last = if full_right { sv.e } else { c };
        for p in c..=last {
            sv.line_mut(&mut r, p).copy_from_slice(&f[p * m..(p + 1) * m]);
        }
        r
    }

    /// Subdomain solutions `ũ_j` of the backward sweep.
    pub fn sweep(&self, f: &[C64]) -> Vec<Vec<C64>> {
        let m = self.op.m();
        let jc = self.part.count();
        // f̃ lives on global rows; only the open left overlap of each
        // subdomain is ever read
        let mut ft = f.to_vec();
        for j in 0..jc.saturating_sub(1) {
            let sv = &self.fwd[j];
            let v = sv.solve(&self.local_rhs(sv, f, &ft, false));
            let mut w = vec![ZERO; self.op.dim()];
            for (i, x) in v.iter().enumerate() {
                w[sv.s * m + i] = x * self.damping[j][i / m];
            }
            let (lo, hi) = (self.part.starts[j + 1] + 1, sv.e - 1);
            let mut aw = vec![ZERO; self.op.dim()];
            self.op.apply_lines_into(lo..=hi, &w, &mut aw);
            for i in lo * m..(hi + 1) * m {
                ft[i] = f[i] - aw[i];
            }
        }
        let mut out: Vec<Vec<C64>> = vec![Vec::new(); jc];
        for j in (0..jc).rev() {
            let sv = &self.bwd[j];
            let mut r = self.local_rhs(sv, f, &ft, true);
            if j + 1 < jc {
                let nb = &self.bwd[j + 1];
                sv.line_mut(&mut r, sv.e).copy_from_slice(nb.line(&out[j + 1], sv.e));
            }
            out[j] = sv.solve(&r);
        }
        out
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        self.glue.glue(&self.sweep(f), self.op.dim())
    }
}

impl LinearMap for SourceTransfer {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        SourceTransfer::apply(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryCondition;
    use crate::partition::make_source_transfer_partition;
    use crate::precond::testutil::*;
    use crate::precond::{Dosm, DosmOptions};

    fn dosm_config(pb: &Problem, part: &StripPartition, w: usize) -> Dosm {
        let jc = part.count();
        let mut b = pb.builder();
        let kind = TransmissionKind::Pml(w);
        let mut fwd = Vec::new();
        let mut bwd = Vec::new();
        for j in 0..jc {
            let l = if j == 0 { Closure::Physical } else { Closure::from_interface(&b.build(kind, part, j, IfaceSide::Left).unwrap()) };
            let last = j + 1 == jc;
            let r = if last { Closure::Physical } else { Closure::from_interface(&b.build(kind, part, j, IfaceSide::Right).unwrap()) };
            fwd.push((l.clone(), r));
            bwd.push((l, if last { Closure::Physical } else { Closure::Dirichlet }));
        }
        Dosm::new(&pb.op, part.clone(), &fwd, &bwd, DosmOptions { cut_forward_sources: true, ..DosmOptions::default() }).unwrap()
    }

    #[test]
    fn matches_dosm_with_cut_sources() {
        for (n, jc, open) in [(16, 3, false), (24, 4, true), (32, 4, true)] {
            let pb = problem(n, 0.9, open, BoundaryCondition::Robin);
            let f = rhs(&pb, 13);
            let part = make_source_transfer_partition(&pb.op, jc).unwrap();
            let st = SourceTransfer::new(&pb, part.clone(), TransmissionKind::Pml(4)).unwrap();
            let d = dosm_config(&pb, &part, 4);
            let u = d.apply(&f);
            let err = rel(&st.apply(&f), &u);
            assert!(err < 1e-10, "n {n} J {jc}: {err}");
        }
    }

    #[test]
    fn damping_satisfies_the_constraints() {
        let pb = problem(24, 0.0, false, BoundaryCondition::Robin);
        let part = make_source_transfer_partition(&pb.op, 4).unwrap();
        let st = SourceTransfer::new(&pb, part.clone(), TransmissionKind::Pml(3)).unwrap();
        let m = pb.op.m();
        for j in 0..part.count() - 1 {
            let d = st.damping(j);
            let (s, e, c) = (part.starts[j], part.ends[j], part.starts[j + 1]);
            // I_{j⟩} D_j and A_{j⟩,·} D_j restricted to the line before e
            assert_eq!(d[e - s], 0.0);
            assert!((0..m).all(|q| pb.op.xcoup[e - 1][q] * d[e - 1 - s] == ZERO));
            // I_{j+1⟨}(D_j − I) and the coupling to the line after s_{j+1}
            assert_eq!(d[c - s] - 1.0, 0.0);
            assert!((0..m).all(|q| pb.op.xcoup[c][q] * (d[c + 1 - s] - 1.0) == ZERO));
        }
    }

    #[test]
    fn exact_transmission_is_exact() {
        let pb = problem(24, 1.0, true, BoundaryCondition::Pml(3));
        let f = rhs(&pb, 6);
        let part = make_source_transfer_partition(&pb.op, 4).unwrap();
        let st = SourceTransfer::new(&pb, part, TransmissionKind::Exact).unwrap();
        assert!(rel(&st.apply(&f), &direct(&pb, &f)) < 1e-10);
    }

    #[test]
    fn zero_in_zero_out() {
        let pb = problem(16, 0.5, false, BoundaryCondition::Robin);
        let part = make_source_transfer_partition(&pb.op, 3).unwrap();
        let st = SourceTransfer::new(&pb, part, TransmissionKind::Pml(3)).unwrap();
        assert!(st.apply(&vec![ZERO; pb.op.dim()]).iter().all(|x| *x == ZERO));
    }

    #[test]
    fn rejects_strip_layout() {
        let pb = problem(16, 0.5, false, BoundaryCondition::Robin);
        let part = crate::partition::make_strip_partition(&pb.op, 3, 0).unwrap();
        assert!(SourceTransfer::new(&pb, part, TransmissionKind::Pml(3)).is_err());
    }
}
