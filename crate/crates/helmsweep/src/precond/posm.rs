//! Parallel optimized Schwarz: every subdomain solves at once with the
//! neighbour data of the previous iteration.

use num_complex::Complex64 as C64;

use super::{closures, trace, PrecondError, Problem, SubdomainSolver, ZERO};
use crate::assembly::SparseOperator;
use crate::linalg::LinearMap;
use crate::partition::{Direction, StripPartition, WeightingOperator};
use crate::transmission::TransmissionKind;

#[derive(Clone, Debug)]
pub struct Posm {
    op: SparseOperator,
    solvers: Vec<SubdomainSolver>,
    glue: WeightingOperator,
}

impl Posm {
    pub fn new(pb: &Problem, part: &StripPartition, left: TransmissionKind, right: TransmissionKind) -> Result<Posm, PrecondError> {
        let cl = closures(&mut pb.builder(), part, left, right)?;
        let solvers = (0..part.count()).map(|j| SubdomainSolver::for_part(&pb.op, part, j, &cl[j])).collect::<Result<Vec<_>, _>>()?;
        Ok(Posm { op: pb.op.clone(), solvers, glue: part.weighting(Direction::Backward) })
    }

    pub fn count(&self) -> usize {
        self.solvers.len()
    }

    fn solve_one(&self, j: usize, f: &[C64], prev: Option<&[Vec<C64>]>) -> Vec<C64> {
        let sv = &self.solvers[j];
        let jc = self.solvers.len();
        let left = prev.filter(|_| j > 0).map(|u| trace(&self.solvers[j - 1], &u[j - 1], sv.s - 1, sv.s));
        let right = prev.filter(|_| j + 1 < jc).map(|u| trace(&self.solvers[j + 1], &u[j + 1], sv.e + 1, sv.e));
        sv.solve(&sv.with_rows(&self.op, sv.restrict(f), left, right))
    }

    /// One simultaneous update, subdomains visited in `order`.
    pub fn iterate_in_order(&self, f: &[C64], prev: Option<&[Vec<C64>]>, order: &[usize]) -> Vec<Vec<C64>> {
        let mut next = vec![Vec::new(); self.solvers.len()];
        for &j in order {
            next[j] = self.solve_one(j, f, prev);
        }
        next
    }

    pub fn iterate(&self, f: &[C64], prev: Option<&[Vec<C64>]>) -> Vec<Vec<C64>> {
        let order: Vec<usize> = (0..self.solvers.len()).collect();
        self.iterate_in_order(f, prev, &order)
    }

    /// `n` iterations from the zero guess.
    pub fn run(&self, f: &[C64], n: usize) -> Vec<Vec<C64>> {
        let mut u: Option<Vec<Vec<C64>>> = None;
        for _ in 0..n {
            u = Some(self.iterate(f, u.as_deref()));
        }
        u.unwrap_or_else(|| self.solvers.iter().map(|sv| vec![ZERO; sv.dim()]).collect())
    }

    pub fn glue(&self, parts: &[Vec<C64>]) -> Vec<C64> {
        self.glue.glue(parts, self.op.dim())
    }

    /// One iteration from the zero guess.
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        self.glue(&self.iterate(f, None))
    }
}

impl LinearMap for Posm {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        Posm::apply(self, x)
    }
}
