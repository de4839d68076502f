//! Sweeping preconditioners at the matrix level. Every method is built once
//! (subdomain factorizations, interface operators) and then applied as a
//! linear map `f ↦ M⁻¹f` with zero initial guess.

use std::ops::RangeInclusive;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::assembly::{assemble_helmholtz, AssemblyError, SparseOperator};
use crate::linalg::{block_tridiag_factor, BlockTriSystem, DenseComplexMatrix, LinalgError, SchurSequence};
use crate::mesh::{BoundarySpec, Grid2D, MediumProfile, PmlSpec};
use crate::partition::{PartitionError, StripPartition};
use crate::transmission::{IfaceSide, InterfaceOperator, SchurBuilder, TransmissionError, TransmissionKind};

pub mod dosm;
pub mod gdc;
pub mod global_osm;
pub mod lu_sweep;
pub mod posm;
pub mod registry;
pub mod resid_sub;
pub mod polarized;
pub mod slp;
pub mod source_transfer;
pub mod substructured;

pub use dosm::{Dosm, DosmIterates, DosmOptions};
pub use gdc::{Gdc, GdcVariant};
pub use global_osm::{GlobalOsm, IfaceData};
pub use lu_sweep::{LuIterates, LuSweep};
pub use resid_sub::{residual_substructure_solve, residual_support, ReducedSolve, ResidualSubstructuring};
pub use posm::Posm;
pub use registry::{build_method, parse_kind, MethodSpec, Preconditioner, METHOD_NAMES};
pub use polarized::{PolarizedState, PolarizedTraces, Splitting, TracePair};
pub use slp::{Slp, SlpForm};
pub use source_transfer::SourceTransfer;
pub use substructured::{SubstructuredDosm, SubstructuredStep};

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Error)]
pub enum PrecondError {
    #[error(transparent)]
    Transmission(#[from] TransmissionError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("subdomain {j} system is singular: {source}")]
    SingularSubdomain { j: usize, source: LinalgError },
    #[error("assembly failed: {0}")]
    Assembly(#[from] AssemblyError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
}

/// Everything needed to rebuild operators: the discrete problem plus the
/// data its transmission builders need.
#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: Grid2D,
    pub medium: MediumProfile,
    pub bc: BoundarySpec,
    pub outer_pml: Option<PmlSpec>,
    pub op: SparseOperator,
}

impl Problem {
    pub fn new(grid: Grid2D, medium: MediumProfile, bc: BoundarySpec, outer_pml: Option<PmlSpec>) -> Result<Problem, PrecondError> {
        let op = assemble_helmholtz(&grid, &medium, &bc, outer_pml.as_ref())?;
        Ok(Problem { grid, medium, bc, outer_pml, op })
    }

    pub fn builder(&self) -> SchurBuilder<'_> {
        SchurBuilder::new(&self.op, self.grid, self.medium.clone(), self.bc, self.outer_pml)
    }
}

/// How a subdomain system is closed at one end.
#[derive(Clone, Debug, PartialEq)]
pub enum Closure {
    /// The end is the end of the global layout; the true rows are kept.
    Physical,
    /// Diagonal block replaced by `S̃` (generalized Robin with Q = I).
    Schur(DenseComplexMatrix),
    /// Row replaced by the identity (Q = 0, P = I).
    Dirichlet,
}

impl Closure {
    pub fn from_interface(op: &InterfaceOperator) -> Closure {
        match &op.matrix {
            Some(s) => Closure::Schur(s.clone()),
            None => Closure::Dirichlet,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Closure::Dirichlet)
    }
}

/// Closures `(left, right)` of every subdomain of `part` for the given
/// transmission kinds; the outermost ends are physical.
pub fn closures(
    builder: &mut SchurBuilder<'_>,
    part: &StripPartition,
    left: TransmissionKind,
    right: TransmissionKind,
) -> Result<Vec<(Closure, Closure)>, PrecondError> {
    let jc = part.count();
    (0..jc)
        .map(|j| {
            let l = if j == 0 { Closure::Physical } else { Closure::from_interface(&builder.build(left, part, j, IfaceSide::Left)?) };
            let r = if j + 1 == jc { Closure::Physical } else { Closure::from_interface(&builder.build(right, part, j, IfaceSide::Right)?) };
            Ok((l, r))
        })
        .collect()
}

/// Subdomain matrix on lines `s..=e` with the given end closures.
pub fn subdomain_system(op: &SparseOperator, s: usize, e: usize, left: &Closure, right: &Closure) -> BlockTriSystem {
    let mut sys = op.block_system(s, e);
    let m = op.m();
    let last = sys.n_blocks() - 1;
    match left {
        Closure::Physical => {}
        Closure::Schur(t) => sys.diag[0] = t.clone(),
        Closure::Dirichlet => {
            sys.diag[0] = DenseComplexMatrix::identity(m);
            if last > 0 {
                sys.upper[0] = vec![ZERO; m];
            }
        }
    }
    match right {
        Closure::Physical => {}
        Closure::Schur(t) => sys.diag[last] = t.clone(),
        Closure::Dirichlet => {
            sys.diag[last] = DenseComplexMatrix::identity(m);
            if last > 0 {
                sys.lower[last - 1] = vec![ZERO; m];
            }
        }
    }
    sys
}

/// Factored subdomain problem on lines `s..=e`.
#[derive(Clone, Debug)]
pub struct SubdomainSolver {
    pub j: usize,
    pub s: usize,
    pub e: usize,
    pub m: usize,
    pub left: Closure,
    pub right: Closure,
    seq: SchurSequence,
}

/// Values of a neighbouring iterate on the two lines a transmission row
/// reads: the line beyond the interface and the interface line itself.
#[derive(Clone, Copy, Debug)]
pub struct Trace<'a> {
    pub beyond: &'a [C64],
    pub at: &'a [C64],
}

impl SubdomainSolver {
    pub fn new(op: &SparseOperator, j: usize, s: usize, e: usize, left: Closure, right: Closure) -> Result<Self, PrecondError> {
        let sys = subdomain_system(op, s, e, &left, &right);
        let seq = block_tridiag_factor(&sys).map_err(|source| PrecondError::SingularSubdomain { j, source })?;
        Ok(SubdomainSolver { j, s, e, m: op.m(), left, right, seq })
    }

    /// Subdomain `j` of a partition.
    pub fn for_part(op: &SparseOperator, part: &StripPartition, j: usize, cl: &(Closure, Closure)) -> Result<Self, PrecondError> {
        Self::new(op, j, part.starts[j], part.ends[j], cl.0.clone(), cl.1.clone())
    }

    pub fn lines(&self) -> RangeInclusive<usize> {
        self.s..=self.e
    }

    pub fn n_lines(&self) -> usize {
        self.e - self.s + 1
    }

    pub fn dim(&self) -> usize {
        self.n_lines() * self.m
    }

    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        self.seq.solve(rhs)
    }

    /// The local slice of line `p` (global position) of a local vector.
    pub fn line<'v>(&self, v: &'v [C64], p: usize) -> &'v [C64] {
        let i = p - self.s;
        &v[i * self.m..(i + 1) * self.m]
    }

    pub fn line_mut<'v>(&self, v: &'v mut [C64], p: usize) -> &'v mut [C64] {
        let i = p - self.s;
        &mut v[i * self.m..(i + 1) * self.m]
    }

    /// `R_j f`.
    pub fn restrict(&self, f: &[C64]) -> Vec<C64> {
        f[self.s * self.m..(self.e + 1) * self.m].to_vec()
    }

    /// `u += R_jᵀ v`.
    pub fn extend_add(&self, v: &[C64], u: &mut [C64]) {
        for (ui, vi) in u[self.s * self.m..(self.e + 1) * self.m].iter_mut().zip(v) {
            *ui += vi;
        }
    }

    /// Transmission row data at an end of the subdomain: `f_s` plus the
    /// neighbour contribution `−A_{s,s∓1} u(s∓1) + (S̃ − A_s) u(s)` for a
    /// Schur closure, `u(s)` for Dirichlet, `f_s` on a physical end.
    pub fn row_data(&self, op: &SparseOperator, side: IfaceSide, f_line: &[C64], nb: Option<Trace<'_>>) -> Vec<C64> {
        let (closure, p) = match side {
            IfaceSide::Left => (&self.left, self.s),
            IfaceSide::Right => (&self.right, self.e),
        };
        match closure {
            Closure::Physical => f_line.to_vec(),
            Closure::Dirichlet => nb.map(|t| t.at.to_vec()).unwrap_or_else(|| vec![ZERO; self.m]),
            Closure::Schur(st) => {
                let mut out = f_line.to_vec();
                if let Some(t) = nb {
                    let c = match side {
                        IfaceSide::Left => &op.xcoup[p - 1],
                        IfaceSide::Right => &op.xcoup[p],
                    };
                    let mut ap = vec![ZERO; self.m];
                    op.line_block_apply(p, t.at, &mut ap);
                    let sp = st.matvec(t.at);
                    for q in 0..self.m {
                        out[q] += -c[q] * t.beyond[q] + sp[q] - ap[q];
                    }
                }
                out
            }
        }
    }

    /// `rhs` with its end rows overwritten by transmission data.
    pub fn with_rows(&self, op: &SparseOperator, mut rhs: Vec<C64>, left: Option<Trace<'_>>, right: Option<Trace<'_>>) -> Vec<C64> {
        let fl = self.line(&rhs, self.s).to_vec();
        let fr = self.line(&rhs, self.e).to_vec();
        let l = self.row_data(op, IfaceSide::Left, &fl, left);
        let r = self.row_data(op, IfaceSide::Right, &fr, right);
        self.line_mut(&mut rhs, self.s).copy_from_slice(&l);
        self.line_mut(&mut rhs, self.e).copy_from_slice(&r);
        rhs
    }
}

/// Trace of the iterate `u` of solver `sv` for a neighbour whose interface
/// sits at `at` and looks across to `beyond`.
pub(crate) fn trace<'a>(sv: &SubdomainSolver, u: &'a [C64], beyond: usize, at: usize) -> Trace<'a> {
    Trace { beyond: sv.line(u, beyond), at: sv.line(u, at) }
}

/// Rows of lines `s..=e` of `f − A u`.
pub(crate) fn local_residual(op: &SparseOperator, f: &[C64], u: &[C64], s: usize, e: usize) -> Vec<C64> {
    let m = op.m();
    let mut y = vec![ZERO; u.len()];
    op.apply_lines_into(s..=e, u, &mut y);
    (s * m..(e + 1) * m).map(|i| f[i] - y[i]).collect()
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    crate::linalg::dense::norm2(v)
}
