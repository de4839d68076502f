//! DOSM as a global deferred correction: each substep solves for a
//! correction from the current global residual.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{closures, local_residual, Closure, PrecondError, Problem, SubdomainSolver, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::LinearMap;
use crate::partition::{Direction, StripPartition, WeightingOperator};
use crate::transmission::TransmissionKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GdcVariant {
    /// Restricted extension `R_jᵀΦ_j`, full residual restriction `R_j`.
    Ras,
    /// Full extension `R_jᵀ`, restricted residual restriction `Φ_jR_j`.
    Ash,
}

#[derive(Clone, Debug)]
pub struct Gdc {
    op: SparseOperator,
    fwd: Vec<SubdomainSolver>,
    bwd: Vec<SubdomainSolver>,
    phi_f: WeightingOperator,
    phi_b: WeightingOperator,
    variant: GdcVariant,
}

impl Gdc {
    pub fn new(
        op: &SparseOperator,
        part: &StripPartition,
        fwd: &[(Closure, Closure)],
        bwd: &[(Closure, Closure)],
        variant: GdcVariant,
    ) -> Result<Gdc, PrecondError> {
        let jc = part.count();
        let bwd_s = (0..jc).map(|j| SubdomainSolver::for_part(op, part, j, &bwd[j])).collect::<Result<Vec<_>, _>>()?;
        let fwd_s = (0..jc.saturating_sub(1))
            .map(|j| if fwd[j] == bwd[j] { Ok(bwd_s[j].clone()) } else { SubdomainSolver::for_part(op, part, j, &fwd[j]) })
            .collect::<Result<Vec<_>, _>>()?;
        let (phi_f, phi_b) = match variant {
            GdcVariant::Ras => (part.weighting(Direction::Forward), part.weighting(Direction::Backward)),
            // the residual propagator of ASH is the transposed RAS error
            // propagator run in reverse, so the two weight families swap; the
            // last subdomain closes the forward pass and keeps its weights
            GdcVariant::Ash => {
                let wb = part.weighting(Direction::Backward);
                let mut wf = part.weighting(Direction::Forward);
                wf.phi[jc - 1] = wb.phi[jc - 1].clone();
                (wb, wf)
            }
        };
        Ok(Gdc { op: op.clone(), fwd: fwd_s, bwd: bwd_s, phi_f, phi_b, variant })
    }

    pub fn from_kinds(pb: &Problem, part: &StripPartition, left: TransmissionKind, right: TransmissionKind, variant: GdcVariant) -> Result<Gdc, PrecondError> {
        let cl = closures(&mut pb.builder(), part, left, right)?;
        Gdc::new(&pb.op, part, &cl, &cl, variant)
    }

    /// One correction on subdomain `sv` with weights `phi`.
    fn correct(&self, sv: &SubdomainSolver, phi: &WeightingOperator, f: &[C64], u: &mut [C64]) {
        let mut r = local_residual(&self.op, f, u, sv.s, sv.e);
        if self.variant == GdcVariant::Ash {
            r = phi.apply_local(sv.j, &r);
        }
        // Q = 0 on Dirichlet rows: homogeneous data for the correction
        if sv.left.is_dirichlet() {
            sv.line_mut(&mut r, sv.s).fill(ZERO);
        }
        if sv.right.is_dirichlet() {
            sv.line_mut(&mut r, sv.e).fill(ZERO);
        }
        let v = sv.solve(&r);
        match self.variant {
            GdcVariant::Ras => phi.extend_add(sv.j, &v, u),
            GdcVariant::Ash => sv.extend_add(&v, u),
        }
    }

    /// One sweep pair from the global iterate `u`.
    pub fn iterate(&self, f: &[C64], mut u: Vec<C64>) -> Vec<C64> {
        for sv in &self.fwd {
            self.correct(sv, &self.phi_f, f, &mut u);
        }
        for sv in self.bwd.iter().rev() {
            self.correct(sv, &self.phi_b, f, &mut u);
        }
        u
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        self.iterate(f, vec![ZERO; self.op.dim()])
    }
}

impl LinearMap for Gdc {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        Gdc::apply(self, x)
    }
}
