//! Block LU sweep on coarse blocks `[s_j, e_j)` whose first diagonal block
//! is replaced by an approximate Schur complement.

use num_complex::Complex64 as C64;

use super::{PrecondError, Problem, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::{block_tridiag_factor, LinearMap, SchurSequence};
use crate::partition::{PartitionKind, StripPartition};
use crate::transmission::{IfaceSide, TransmissionKind};

#[derive(Clone, Debug)]
pub struct LuSweep {
    op: SparseOperator,
    lo: Vec<usize>,
    hi: Vec<usize>,
    blocks: Vec<SchurSequence>,
}

/// Forward and backward coarse-block iterates.
#[derive(Clone, Debug, PartialEq)]
pub struct LuIterates {
    pub v: Vec<Vec<C64>>,
    pub u: Vec<Vec<C64>>,
}

impl LuSweep {
    /// `kind` approximates `T_j`'s leading block for `j ≥ 1`.
    pub fn new(pb: &Problem, part: &StripPartition, kind: TransmissionKind) -> Result<LuSweep, PrecondError> {
        if part.kind != PartitionKind::NonOverlapping {
            return Err(PrecondError::Invalid("the LU sweep needs a non-overlapping partition".into()));
        }
        let jc = part.count();
        let last = pb.op.n_lines() - 1;
        let lo: Vec<usize> = part.starts.clone();
        let hi: Vec<usize> = (0..jc).map(|j| if j + 1 < jc { part.ends[j] - 1 } else { last }).collect();
        let mut builder = pb.builder();
        let mut blocks = Vec::with_capacity(jc);
        for j in 0..jc {
            let mut sys = pb.op.block_system(lo[j], hi[j]);
            if j > 0 {
                let t = builder.build(kind, part, j, IfaceSide::Left)?;
                sys.diag[0] = t
                    .matrix
                    .ok_or_else(|| PrecondError::Invalid(format!("{kind:?} does not give a Schur block")))?;
            }
            blocks.push(block_tridiag_factor(&sys).map_err(|source| PrecondError::SingularSubdomain { j, source })?);
        }
        Ok(LuSweep { op: pb.op.clone(), lo, hi, blocks })
    }

    /// Line range `(lo, hi)` of coarse block `j`.
    pub fn block(&self, j: usize) -> (usize, usize) {
        (self.lo[j], self.hi[j])
    }

    pub fn sweep(&self, f: &[C64]) -> LuIterates {
        let m = self.op.m();
        let jc = self.blocks.len();
        let mut rhs: Vec<Vec<C64>> = Vec::with_capacity(jc);
        let mut v: Vec<Vec<C64>> = Vec::with_capacity(jc);
        for j in 0..jc {
            let (lo, hi) = (self.lo[j], self.hi[j]);
            let mut g = f[lo * m..(hi + 1) * m].to_vec();
            if j > 0 {
                // −L v_{j−1}: the last line of the previous block feeds row lo
                let prev = &v[j - 1];
                let pl = prev.len() - m;
                let c = &self.op.xcoup[lo - 1];
                for q in 0..m {
                    g[q] -= c[q] * prev[pl + q];
                }
            }
            v.push(self.blocks[j].solve(&g));
            rhs.push(g);
        }
        let mut u: Vec<Vec<C64>> = vec![Vec::new(); jc];
        u[jc - 1] = v[jc - 1].clone();
        for j in (0..jc - 1).rev() {
            // T_j u_j = T_j v_j − U_j u_{j+1} with T_j v_j the forward data
            let mut g = rhs[j].clone();
            let c = &self.op.xcoup[self.hi[j]];
            let gl = g.len() - m;
            for q in 0..m {
                g[gl + q] -= c[q] * u[j + 1][q];
            }
            u[j] = self.blocks[j].solve(&g);
        }
        LuIterates { v, u }
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let m = self.op.m();
        let mut out = vec![ZERO; self.op.dim()];
        for (j, uj) in self.sweep(f).u.iter().enumerate() {
            out[self.lo[j] * m..(self.hi[j] + 1) * m].copy_from_slice(uj);
        }
        out
    }
}

impl LinearMap for LuSweep {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        LuSweep::apply(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::block_lu_solve;
    use crate::mesh::BoundaryCondition;
    use crate::partition::make_strip_partition;
    use crate::precond::testutil::*;
    use crate::precond::{Closure, Dosm, DosmOptions};

    #[test]
    fn exact_blocks_reproduce_the_global_factorization() {
        for (open, outer) in [(false, BoundaryCondition::Robin), (true, BoundaryCondition::Pml(3))] {
            let pb = problem(16, 1.0, open, outer);
            let f = rhs(&pb, 4);
            let seq = block_tridiag_factor(&pb.op.to_block_system()).unwrap();
            let u = block_lu_solve(&seq, &f).unwrap();
            for jc in [1, 2, 4] {
                let part = make_strip_partition(&pb.op, jc, 0).unwrap();
                let lu = LuSweep::new(&pb, &part, TransmissionKind::Exact).unwrap();
                assert!(rel(&lu.apply(&f), &u) < 1e-12, "J {jc}");
            }
        }
    }

    #[test]
    fn iterates_match_the_dosm_specialization() {
        let pb = problem(16, 0.6, true, BoundaryCondition::Robin);
        let f = rhs(&pb, 9);
        let part = make_strip_partition(&pb.op, 4, 0).unwrap();
        let jc = part.count();
        for kind in [TransmissionKind::Exact, TransmissionKind::Pml(4), TransmissionKind::IdentExt] {
            let lu = LuSweep::new(&pb, &part, kind).unwrap();
            let mut b = pb.builder();
            let cl: Vec<(Closure, Closure)> = (0..jc)
                .map(|j| {
                    let l = if j == 0 { Closure::Physical } else { Closure::from_interface(&b.build(kind, &part, j, IfaceSide::Left).unwrap()) };
                    let r = if j + 1 == jc { Closure::Physical } else { Closure::Dirichlet };
                    (l, r)
                })
                .collect();
            let d = Dosm::new(&pb.op, part.clone(), &cl, &cl, DosmOptions::default()).unwrap();
            let it = d.sweep(&f);
            let lus = lu.sweep(&f);
            let m = pb.op.m();
            for j in 0..jc {
                let n = lus.u[j].len();
                if j + 1 < jc {
                    assert!(rel(&lus.v[j], &it.half[j][..n]) < 1e-12, "{kind:?} half {j}");
                    // the Dirichlet row of the forward iterate is zero
                    assert!(it.half[j][n..].iter().all(|x| *x == ZERO));
                }
                assert!(rel(&lus.u[j], &it.full[j][..n]) < 1e-12, "{kind:?} full {j}");
                assert_eq!(n, (lu.block(j).1 - lu.block(j).0 + 1) * m);
            }
            assert!(rel(&lu.apply(&f), &d.apply(&f)) < 1e-12);
        }
    }

    #[test]
    fn rejects_overlap() {
        let pb = problem(16, 0.0, false, BoundaryCondition::Robin);
        let part = make_strip_partition(&pb.op, 2, 2).unwrap();
        assert!(LuSweep::new(&pb, &part, TransmissionKind::Exact).is_err());
    }
}
