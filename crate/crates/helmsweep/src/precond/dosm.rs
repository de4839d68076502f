//! Double-sweep optimized Schwarz in the subdomain transmission form.

use num_complex::Complex64 as C64;

use super::{closures, trace, Closure, PrecondError, Problem, SubdomainSolver, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::LinearMap;
use crate::partition::{Direction, StripPartition, WeightingOperator};
use crate::transmission::TransmissionKind;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DosmOptions {
    /// Drop the sources to the right of `s_{j+1}` in the forward sweep, which
    /// turns the right overlap into part of the exterior.
    pub cut_forward_sources: bool,
    /// Reuse the last backward solution on `Ω_0` as the next forward one
    /// when both sweeps close `Ω_0` alike; the two solves coincide then.
    pub reuse_first: bool,
}

/// Subdomain iterates of one double sweep: `half[j]` from the forward sweep
/// (`j < J−1`), `full[j]` from the backward sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct DosmIterates {
    pub half: Vec<Vec<C64>>,
    pub full: Vec<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct Dosm {
    op: SparseOperator,
    part: StripPartition,
    fwd: Vec<SubdomainSolver>,
    bwd: Vec<SubdomainSolver>,
    glue: WeightingOperator,
    opts: DosmOptions,
    first_shared: bool,
}

impl Dosm {
    /// Closures per subdomain for the forward and the backward sweep.
    pub fn new(
        op: &SparseOperator,
        part: StripPartition,
        fwd: &[(Closure, Closure)],
        bwd: &[(Closure, Closure)],
        opts: DosmOptions,
    ) -> Result<Dosm, PrecondError> {
        let jc = part.count();
        if fwd.len() != jc || bwd.len() != jc {
            return Err(PrecondError::Invalid(format!("need {jc} closure pairs per sweep")));
        }
        let bwd_s = (0..jc).map(|j| SubdomainSolver::for_part(op, &part, j, &bwd[j])).collect::<Result<Vec<_>, _>>()?;
        let fwd_s = (0..jc.saturating_sub(1))
            .map(|j| if fwd[j] == bwd[j] { Ok(bwd_s[j].clone()) } else { SubdomainSolver::for_part(op, &part, j, &fwd[j]) })
            .collect::<Result<Vec<_>, _>>()?;
        let glue = part.weighting(Direction::Backward);
        let first_shared = jc > 1 && fwd[0] == bwd[0];
        Ok(Dosm { op: op.clone(), part, fwd: fwd_s, bwd: bwd_s, glue, opts, first_shared })
    }

    /// Same transmission kinds in both sweeps.
    pub fn from_kinds(pb: &Problem, part: StripPartition, left: TransmissionKind, right: TransmissionKind) -> Result<Dosm, PrecondError> {
        let cl = closures(&mut pb.builder(), &part, left, right)?;
        Dosm::new(&pb.op, part, &cl, &cl, DosmOptions::default())
    }

    pub fn with_options(mut self, opts: DosmOptions) -> Dosm {
        self.opts = opts;
        self
    }

    pub fn partition(&self) -> &StripPartition {
        &self.part
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }

    pub fn backward_solver(&self, j: usize) -> &SubdomainSolver {
        &self.bwd[j]
    }

    pub fn forward_solver(&self, j: usize) -> &SubdomainSolver {
        &self.fwd[j]
    }

    fn forward_source(&self, j: usize, f: &[C64]) -> Vec<C64> {
        let sv = &self.fwd[j];
        let mut fj = sv.restrict(f);
        if self.opts.cut_forward_sources {
            let cut = self.part.starts[j + 1];
            for p in cut + 1..=sv.e {
                sv.line_mut(&mut fj, p).fill(ZERO);
            }
        }
        fj
    }

    /// One double sweep from the previous subdomain iterates (`None` for
    /// the zero initial guess).
    pub fn iterate(&self, f: &[C64], prev: Option<&[Vec<C64>]>) -> DosmIterates {
        let jc = self.part.count();
        let mut half: Vec<Vec<C64>> = Vec::with_capacity(jc.saturating_sub(1));
        for j in 0..jc.saturating_sub(1) {
            let sv = &self.fwd[j];
            let reuse = j == 0 && self.opts.reuse_first && self.first_shared && !self.opts.cut_forward_sources;
            if let (true, Some(u)) = (reuse, prev) {
                half.push(u[0].clone());
                continue;
            }
            let left = (j > 0).then(|| trace(&self.fwd[j - 1], &half[j - 1], sv.s - 1, sv.s));
            let right = prev.map(|u| trace(&self.bwd[j + 1], &u[j + 1], sv.e + 1, sv.e));
            let rhs = sv.with_rows(&self.op, self.forward_source(j, f), left, right);
            half.push(sv.solve(&rhs));
        }
        let mut full: Vec<Vec<C64>> = vec![Vec::new(); jc];
        for j in (0..jc).rev() {
            let sv = &self.bwd[j];
            let left = (j > 0).then(|| trace(&self.fwd[j - 1], &half[j - 1], sv.s - 1, sv.s));
            let right = (j + 1 < jc).then(|| trace(&self.bwd[j + 1], &full[j + 1], sv.e + 1, sv.e));
            let rhs = sv.with_rows(&self.op, sv.restrict(f), left, right);
            full[j] = sv.solve(&rhs);
        }
        DosmIterates { half, full }
    }

    pub fn sweep(&self, f: &[C64]) -> DosmIterates {
        self.iterate(f, None)
    }

    /// `Σ_j R_jᵀ Φ_j u_j` with the backward weights.
    pub fn glue(&self, parts: &[Vec<C64>]) -> Vec<C64> {
        self.glue.glue(parts, self.op.dim())
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        self.glue(&self.sweep(f).full)
    }
}

impl LinearMap for Dosm {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        Dosm::apply(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryCondition;
    use crate::partition::make_strip_partition;
    use crate::precond::testutil::*;

    #[test]
    fn exact_schur_is_nilpotent_of_degree_one() {
        for (alpha, open, outer) in [(0.0, false, BoundaryCondition::Robin), (1.0, true, BoundaryCondition::Pml(4)), (0.5, false, BoundaryCondition::Dirichlet)] {
            let pb = problem(16, alpha, open, outer);
            let f = rhs(&pb, 7);
            let u = direct(&pb, &f);
            for jc in [2, 3, 4] {
                let part = make_strip_partition(&pb.op, jc, 0).unwrap();
                let d = Dosm::from_kinds(&pb, part, TransmissionKind::Exact, TransmissionKind::Exact).unwrap();
                let err = rel(&d.apply(&f), &u);
                assert!(err < 1e-11, "alpha {alpha} J {jc}: {err}");
            }
        }
    }

    #[test]
    fn overlapping_exact_schur_is_exact_too() {
        let pb = problem(16, 1.0, false, BoundaryCondition::Robin);
        let f = rhs(&pb, 3);
        let part = make_strip_partition(&pb.op, 3, 2).unwrap();
        let d = Dosm::from_kinds(&pb, part, TransmissionKind::Exact, TransmissionKind::Exact).unwrap();
        assert!(rel(&d.apply(&f), &direct(&pb, &f)) < 1e-11);
    }

    #[test]
    fn reusing_the_first_solve_changes_nothing() {
        let pb = problem(16, 0.5, true, BoundaryCondition::Robin);
        let f = rhs(&pb, 4);
        let part = make_strip_partition(&pb.op, 3, 0).unwrap();
        let d = Dosm::from_kinds(&pb, part, TransmissionKind::Robin, TransmissionKind::Robin).unwrap();
        let r = d.clone().with_options(DosmOptions { reuse_first: true, ..DosmOptions::default() });
        let u1 = d.sweep(&f);
        let a = d.iterate(&f, Some(&u1.full));
        let b = r.iterate(&f, Some(&u1.full));
        assert!(rel(&d.glue(&a.full), &r.glue(&b.full)) < 1e-13);
    }

    #[test]
    fn zero_source_gives_zero() {
        let pb = problem(12, 0.3, false, BoundaryCondition::Robin);
        let part = make_strip_partition(&pb.op, 3, 0).unwrap();
        let d = Dosm::from_kinds(&pb, part, TransmissionKind::Robin, TransmissionKind::Robin).unwrap();
        let u = d.apply(&vec![ZERO; pb.op.dim()]);
        assert!(u.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn single_subdomain_is_a_direct_solve() {
        let pb = problem(10, 1.0, true, BoundaryCondition::Robin);
        let f = rhs(&pb, 1);
        let part = make_strip_partition(&pb.op, 1, 0).unwrap();
        let d = Dosm::from_kinds(&pb, part, TransmissionKind::Pml(3), TransmissionKind::Pml(3)).unwrap();
        assert!(rel(&d.apply(&f), &direct(&pb, &f)) < 1e-12);
    }
}
