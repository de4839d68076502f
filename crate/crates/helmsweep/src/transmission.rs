//! Interface operators `S̃` closing a subdomain at one of its interface
//! lines. Every kind is a dense `m × m` block that replaces the diagonal
//! block of the interface row (Q = I), except Dirichlet, which replaces the
//! whole row by the identity.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{assemble_truncated, tridiag, Axis, AxisNode, MediumOverride, SparseOperator};
use crate::linalg::{schur_recurrence, BlockTriSystem, DenseComplexMatrix, LinalgError};
use crate::mesh::{BoundarySpec, Grid2D, MediumProfile, PmlSpec};
use crate::partition::StripPartition;

#[derive(Debug, Error, PartialEq)]
pub enum TransmissionError {
    #[error("exterior system of subdomain {j} is singular: {source}")]
    SingularExterior { j: usize, source: LinalgError },
    #[error("subdomain {j} has no {side:?} interface")]
    NoInterface { j: usize, side: IfaceSide },
    #[error("assembly failed: {0}")]
    Assembly(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransmissionKind {
    /// Exact discrete Schur complement of the true exterior.
    Exact,
    /// Schur complement of an exterior whose medium is the constant
    /// continuation of the layer next to the interface.
    IdentExt,
    /// PML of the given width (in cells) placed right outside the interface.
    Pml(usize),
    /// Zeroth-order absorbing condition, discretized like a Robin boundary.
    Robin,
    /// Dirichlet data (identity row).
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IfaceSide {
    /// `⟨`: the subdomain's left interface, exterior to the left.
    Left,
    /// `⟩`: the subdomain's right interface, exterior to the right.
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceOperator {
    pub kind: TransmissionKind,
    pub side: IfaceSide,
    /// Line position of the interface in the operator layout.
    pub line: usize,
    /// `S̃`; `None` for Dirichlet.
    pub matrix: Option<DenseComplexMatrix>,
}

impl InterfaceOperator {
    pub fn is_dirichlet(&self) -> bool {
        self.matrix.is_none()
    }

    /// Coordinate triplet dump `row col re im` of `S̃`.
    pub fn dump_triplets(&self) -> String {
        let mut s = String::new();
        if let Some(m) = &self.matrix {
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let v = m[(r, c)];
                    if v != C64::new(0.0, 0.0) {
                        let _ = writeln!(s, "{r} {c} {:e} {:e}", v.re, v.im);
                    }
                }
            }
        }
        s
    }
}

/// Forward Schur recurrence `T_p` over all lines.
fn forward_ts(op: &SparseOperator) -> Result<Vec<DenseComplexMatrix>, LinalgError> {
    schur_recurrence(&op.to_block_system())
}

/// Backward recurrence `B_p = D_p − C_p B_{p+1}⁻¹ C_p`, indexed by line.
fn backward_ts(op: &SparseOperator) -> Result<Vec<DenseComplexMatrix>, LinalgError> {
    let sys = op.to_block_system();
    let rev = BlockTriSystem {
        m: sys.m,
        diag: sys.diag.iter().rev().cloned().collect(),
        lower: sys.upper.iter().rev().cloned().collect(),
        upper: sys.lower.iter().rev().cloned().collect(),
    };
    let mut ts = schur_recurrence(&rev)?;
    ts.reverse();
    Ok(ts)
}

/// `d − diag(c) · t⁻¹ · diag(c)`.
fn fold(d: &DenseComplexMatrix, c: &[C64], t: &DenseComplexMatrix) -> Result<DenseComplexMatrix, LinalgError> {
    let tinv = t.inverse()?;
    let mut s = d.clone();
    crate::linalg::blocktri::eliminate_block(&mut s, c, &tinv, c);
    Ok(s)
}

/// Builds and caches interface operators for one problem.
pub struct SchurBuilder<'a> {
    pub op: &'a SparseOperator,
    pub grid: Grid2D,
    pub medium: MediumProfile,
    pub bc: BoundarySpec,
    pub outer_pml: Option<PmlSpec>,
    /// Reference frequency for transmission PMLs.
    pub omega: f64,
    fwd: Option<Vec<DenseComplexMatrix>>,
    bwd: Option<Vec<DenseComplexMatrix>>,
    ident: HashMap<(u64, IfaceSide), Vec<DenseComplexMatrix>>,
}

impl<'a> SchurBuilder<'a> {
    pub fn new(
        op: &'a SparseOperator,
        grid: Grid2D,
        medium: MediumProfile,
        bc: BoundarySpec,
        outer_pml: Option<PmlSpec>,
    ) -> Self {
        let omega = outer_pml.map(|p| p.omega).unwrap_or(medium.layer_k(0));
        SchurBuilder { op, grid, medium, bc, outer_pml, omega, fwd: None, bwd: None, ident: HashMap::new() }
    }

    /// Interface operator of `kind` at line `line` on `side`; `j` is only
    /// used in error messages.
    pub fn build_at(&mut self, kind: TransmissionKind, side: IfaceSide, line: usize, j: usize) -> Result<InterfaceOperator, TransmissionError> {
        let nl = self.op.n_lines();
        let has_ext = match side {
            IfaceSide::Left => line > 0,
            IfaceSide::Right => line + 1 < nl,
        };
        if !has_ext {
            return Err(TransmissionError::NoInterface { j, side });
        }
        let sing = |source| TransmissionError::SingularExterior { j, source };
        let matrix = match kind {
            TransmissionKind::Dirichlet => None,
            TransmissionKind::Exact => Some(self.exact_at(side, line).map_err(sing)?),
            TransmissionKind::IdentExt => Some(self.ident_ext_at(side, line).map_err(sing)?),
            TransmissionKind::Pml(w) => Some(self.pml_at(side, line, w).map_err(sing)?),
            TransmissionKind::Robin => Some(robin_block(self.op, side, line)),
        };
        Ok(InterfaceOperator { kind, side, line, matrix })
    }

    /// Operator for subdomain `j` of a partition.
    pub fn build(&mut self, kind: TransmissionKind, p: &StripPartition, j: usize, side: IfaceSide) -> Result<InterfaceOperator, TransmissionError> {
        let has = match side {
            IfaceSide::Left => j > 0,
            IfaceSide::Right => j + 1 < p.count(),
        };
        if !has {
            return Err(TransmissionError::NoInterface { j, side });
        }
        let line = match side {
            IfaceSide::Left => p.starts[j],
            IfaceSide::Right => p.ends[j],
        };
        self.build_at(kind, side, line, j)
    }

    fn exact_at(&mut self, side: IfaceSide, line: usize) -> Result<DenseComplexMatrix, LinalgError> {
        match side {
            IfaceSide::Left => {
                if self.fwd.is_none() {
                    self.fwd = Some(forward_ts(self.op)?);
                }
                Ok(self.fwd.as_ref().unwrap()[line].clone())
            }
            IfaceSide::Right => {
                if self.bwd.is_none() {
                    self.bwd = Some(backward_ts(self.op)?);
                }
                Ok(self.bwd.as_ref().unwrap()[line].clone())
            }
        }
    }

    /// True interface block, exterior eliminated with the constant medium
    /// of the neighbouring exterior line.
    fn ident_ext_at(&mut self, side: IfaceSide, line: usize) -> Result<DenseComplexMatrix, LinalgError> {
        let (nb, c) = match side {
            IfaceSide::Left => (line - 1, &self.op.xcoup[line - 1]),
            IfaceSide::Right => (line + 1, &self.op.xcoup[line]),
        };
        let kc = self.op.k[nb];
        let key = (kc.to_bits(), side);
        if !self.ident.contains_key(&key) {
            let ext = assemble_truncated(&self.grid, &self.medium, &MediumOverride::Constant(kc), &self.bc, self.outer_pml.as_ref())
                .expect("medium and boundary already validated");
            let ts = match side {
                IfaceSide::Left => forward_ts(&ext)?,
                IfaceSide::Right => backward_ts(&ext)?,
            };
            self.ident.insert(key, ts);
        }
        let t = &self.ident[&key][nb];
        fold(&self.op.diag_block(line), c, t)
    }

    fn pml_at(&self, side: IfaceSide, line: usize, width: usize) -> Result<DenseComplexMatrix, LinalgError> {
        let spec = PmlSpec::new(width, self.op.h, self.omega);
        pml_schur_block(self.op, side, line, &spec)
    }
}

/// PML lines beyond the interface (ordered away from it) as an x-axis
/// plus the stretched coupling to the interface line.
fn pml_exterior(op: &SparseOperator, line: usize, spec: &PmlSpec) -> (SparseOperator, Vec<C64>) {
    let h = op.h;
    let w = spec.width_cells;
    let s = |d: f64| spec.stretch(d * h, h);
    // line t (1..w-1) sits at depth t·h; Dirichlet at depth w·h
    let nodes: Vec<AxisNode> = (1..w)
        .map(|t| AxisNode { idx: t as i64, s: s(t as f64), w: 1.0, robin: false, physical: false })
        .collect();
    let half = (1..w.saturating_sub(1)).map(|t| s(t as f64 + 0.5)).collect();
    let axis = Axis { nodes, half, ghost_lo: Some(s(0.5)), ghost_hi: Some(s(w as f64 - 0.5)) };
    let kk = op.k[line];
    let n = axis.len();
    let ext = if n > 0 {
        SparseOperator::from_axes(h, axis, op.yaxis.clone(), vec![kk; n], vec![op.p0[line]; n])
    } else {
        SparseOperator::from_axes(h, axis, op.yaxis.clone(), vec![], vec![])
    };
    let c1 = s(0.5);
    let ctil = op.yaxis.nodes.iter().map(|y| y.w * y.s / (c1 * h * h)).collect();
    (ext, ctil)
}

/// `S̃` of a PML of width `spec.width_cells` attached at the interface line.
/// The first PML line is the nearest to the interface; the far end is
/// Dirichlet.
pub fn pml_schur_block(op: &SparseOperator, side: IfaceSide, line: usize, spec: &PmlSpec) -> Result<DenseComplexMatrix, LinalgError> {
    let (ext, ctil) = pml_exterior(op, line, spec);
    let c_true = match side {
        IfaceSide::Left => &op.xcoup[line - 1],
        IfaceSide::Right => &op.xcoup[line],
    };
    let mut d = op.diag_block(line);
    for q in 0..op.m() {
        d[(q, q)] += c_true[q] - ctil[q];
    }
    if ext.n_lines() == 0 {
        return Ok(d);
    }
    // eliminate from the Dirichlet end towards the interface
    let ts = backward_ts(&ext)?;
    fold(&d, &ctil, &ts[0])
}

/// Interface block assembled as a Robin boundary line: half weights along
/// the interface, one-sided normal difference and the `−p0/h` closure.
pub fn robin_block(op: &SparseOperator, side: IfaceSide, line: usize) -> DenseComplexMatrix {
    let m = op.m();
    let h = op.h;
    let xn = &op.xaxis.nodes[line];
    let c_in = match side {
        IfaceSide::Left => &op.xcoup[line],
        IfaceSide::Right => &op.xcoup[line - 1],
    };
    let wx = 0.5;
    let kk = op.k[line];
    let p0 = C64::new(0.0, -kk);
    let off: Vec<C64> = op.ycoup[line].iter().map(|c| c * (wx / xn.w)).collect();
    let ya = &op.yaxis;
    let main: Vec<C64> = (0..m)
        .map(|q| {
            let yn = &ya.nodes[q];
            let mut v = C64::new(wx * yn.w * kk * kk, 0.0) * xn.s * yn.s - c_in[q];
            if q > 0 {
                v -= off[q - 1];
            } else if let Some(g) = ya.ghost_lo {
                v -= wx * xn.s / (g * h * h);
            }
            if q + 1 < m {
                v -= off[q];
            } else if let Some(g) = ya.ghost_hi {
                v -= wx * xn.s / (g * h * h);
            }
            v -= yn.w * yn.s * p0 / h;
            if yn.robin {
                v -= wx * xn.s * op.p0[line] / h;
            }
            v
        })
        .collect();
    tridiag(&main, &off)
}

/// Exact Schur complement `A_{j⟨} − A_{j⟨,∼j} A_{∼j}⁻¹ A_{∼j,j⟨}` (or the
/// right-hand analogue) for subdomain `j`.
pub fn exact_schur(op: &SparseOperator, p: &StripPartition, j: usize, side: IfaceSide) -> Result<InterfaceOperator, TransmissionError> {
    let line = match side {
        IfaceSide::Left if j > 0 => p.starts[j],
        IfaceSide::Right if j + 1 < p.count() => p.ends[j],
        _ => return Err(TransmissionError::NoInterface { j, side }),
    };
    let (lo, hi) = match side {
        IfaceSide::Left => (0, line - 1),
        IfaceSide::Right => (line + 1, op.n_lines() - 1),
    };
    let sing = |source| TransmissionError::SingularExterior { j, source };
    let sys = op.block_system(lo, hi);
    let t = match side {
        IfaceSide::Left => schur_recurrence(&sys).map_err(sing)?.pop().unwrap(),
        IfaceSide::Right => {
            let rev = BlockTriSystem {
                m: sys.m,
                diag: sys.diag.into_iter().rev().collect(),
                lower: sys.upper.into_iter().rev().collect(),
                upper: sys.lower.into_iter().rev().collect(),
            };
            schur_recurrence(&rev).map_err(sing)?.pop().unwrap()
        }
    };
    let c = match side {
        IfaceSide::Left => &op.xcoup[line - 1],
        IfaceSide::Right => &op.xcoup[line],
    };
    let s = fold(&op.diag_block(line), c, &t).map_err(sing)?;
    Ok(InterfaceOperator { kind: TransmissionKind::Exact, side, line, matrix: Some(s) })
}

/// Identity-extension Schur complement for subdomain `j`.
pub fn ident_ext_schur(
    op: &SparseOperator,
    grid: &Grid2D,
    medium: &MediumProfile,
    bc: &BoundarySpec,
    outer_pml: Option<&PmlSpec>,
    p: &StripPartition,
    j: usize,
    side: IfaceSide,
) -> Result<InterfaceOperator, TransmissionError> {
    SchurBuilder::new(op, *grid, medium.clone(), *bc, outer_pml.copied()).build(TransmissionKind::IdentExt, p, j, side)
}

/// PML Schur complement for subdomain `j`.
pub fn pml_schur(op: &SparseOperator, pml: &PmlSpec, p: &StripPartition, j: usize, side: IfaceSide) -> Result<InterfaceOperator, TransmissionError> {
    let line = match side {
        IfaceSide::Left if j > 0 => p.starts[j],
        IfaceSide::Right if j + 1 < p.count() => p.ends[j],
        _ => return Err(TransmissionError::NoInterface { j, side }),
    };
    let s = pml_schur_block(op, side, line, pml).map_err(|source| TransmissionError::SingularExterior { j, source })?;
    Ok(InterfaceOperator { kind: TransmissionKind::Pml(pml.width_cells), side, line, matrix: Some(s) })
}

/// Robin transmission operator for subdomain `j`.
pub fn robin_operator(op: &SparseOperator, p: &StripPartition, j: usize, side: IfaceSide) -> Result<InterfaceOperator, TransmissionError> {
    let line = match side {
        IfaceSide::Left if j > 0 => p.starts[j],
        IfaceSide::Right if j + 1 < p.count() => p.ends[j],
        _ => return Err(TransmissionError::NoInterface { j, side }),
    };
    Ok(InterfaceOperator { kind: TransmissionKind::Robin, side, line, matrix: Some(robin_block(op, side, line)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_helmholtz, random_source};
    use crate::linalg::dense_lu_factor;
    use crate::mesh::{build_grid, layered_wavenumber, BoundaryCondition};
    use crate::partition::make_strip_partition;

    fn setup(n: usize, alpha: f64, bc: BoundarySpec) -> (Grid2D, MediumProfile, SparseOperator, Option<PmlSpec>) {
        let g = build_grid(n, n).unwrap();
        let med = layered_wavenumber(&[8.0; 4], &[0.0, 8.0, 4.0, -4.0], alpha, 1).unwrap();
        let pml = bc.left.pml_width().map(|w| PmlSpec::new(w, g.h, 8.0));
        let op = assemble_helmholtz(&g, &med, &bc, pml.as_ref()).unwrap();
        (g, med, op, pml)
    }

    /// Dense elimination of the exterior lines.
    fn dense_schur(op: &SparseOperator, line: usize, side: IfaceSide) -> DenseComplexMatrix {
        let a = op.to_dense();
        let m = op.m();
        let (ext_lo, ext_hi) = match side {
            IfaceSide::Left => (0, line * m),
            IfaceSide::Right => ((line + 1) * m, op.dim()),
        };
        let ne = ext_hi - ext_lo;
        let aee = a.block(ext_lo, ext_lo, ne, ne);
        let aie = a.block(line * m, ext_lo, m, ne);
        let aei = a.block(ext_lo, line * m, ne, m);
        let x = dense_lu_factor(&aee).unwrap().solve_matrix(&aei);
        a.block(line * m, line * m, m, m).sub(&aie.matmul(&x))
    }

    #[test]
    fn exact_schur_matches_dense_elimination() {
        for bc in [BoundarySpec::guide(BoundaryCondition::Robin), BoundarySpec::open(BoundaryCondition::Pml(2))] {
            let (g, med, op, pml) = setup(11, 1.0, bc);
            let p = make_strip_partition(&op, 3, 0).unwrap();
            let mut b = SchurBuilder::new(&op, g, med, bc, pml);
            for j in 0..3 {
                for side in [IfaceSide::Left, IfaceSide::Right] {
                    let Ok(s) = exact_schur(&op, &p, j, side) else {
                        assert!((j == 0 && side == IfaceSide::Left) || (j == 2 && side == IfaceSide::Right));
                        continue;
                    };
                    let oracle = dense_schur(&op, s.line, side);
                    let sm = s.matrix.as_ref().unwrap();
                    assert!(sm.sub(&oracle).max_abs() <= 1e-12 * oracle.max_abs());
                    let cached = b.build(TransmissionKind::Exact, &p, j, side).unwrap();
                    assert!(cached.matrix.unwrap().sub(sm).max_abs() <= 1e-12 * oracle.max_abs());
                }
            }
        }
    }

    #[test]
    fn exact_truncation_reproduces_global_solution() {
        let bc = BoundarySpec::guide(BoundaryCondition::Robin);
        let (_, _, op, _) = setup(9, 1.0, bc);
        let p = make_strip_partition(&op, 2, 0).unwrap();
        // f supported in the second subdomain
        let mut f = random_source(&op, 4);
        let m = op.m();
        for v in f[..(p.starts[1] + 1) * m].iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        let u = dense_lu_factor(&op.to_dense()).unwrap().solve(&f);
        let s = exact_schur(&op, &p, 1, IfaceSide::Left).unwrap();
        let mut local = op.block_system(p.starts[1], p.ends[1]).to_dense();
        local.set_block(0, 0, s.matrix.as_ref().unwrap());
        let uj = dense_lu_factor(&local).unwrap().solve(&p.restrict(1, &f));
        let uref = p.restrict(1, &u);
        let err = uj.iter().zip(&uref).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = uref.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-11 * scale);
    }

    #[test]
    fn ident_ext_equals_exact_for_constant_medium_and_gap_grows() {
        let bc = BoundarySpec::guide(BoundaryCondition::Robin);
        let gap = |alpha: f64| {
            let (g, med, op, pml) = setup(15, alpha, bc);
            let p = make_strip_partition(&op, 4, 0).unwrap();
            let mut b = SchurBuilder::new(&op, g, med, bc, pml);
            let e = b.build(TransmissionKind::Exact, &p, 2, IfaceSide::Left).unwrap().matrix.unwrap();
            let i = b.build(TransmissionKind::IdentExt, &p, 2, IfaceSide::Left).unwrap().matrix.unwrap();
            i.sub(&e).max_abs() / e.max_abs()
        };
        assert!(gap(0.0) <= 1e-14);
        assert!(gap(0.001) < gap(0.1));
    }

    #[test]
    fn folded_pml_matches_unfolded_solve() {
        let bc = BoundarySpec::guide(BoundaryCondition::Robin);
        let (_, _, op, _) = setup(11, 0.5, bc);
        let p = make_strip_partition(&op, 2, 0).unwrap();
        let spec = PmlSpec::new(4, op.h, 8.0);
        let line = p.starts[1];
        let s = pml_schur_block(&op, IfaceSide::Left, line, &spec).unwrap();
        let mut folded = op.block_system(line, p.ends[1]).to_dense();
        folded.set_block(0, 0, &s);
        // unfolded: PML lines at depths 3, 2, 1 followed by the subdomain
        let (ext, ctil) = pml_exterior(&op, line, &spec);
        let m = op.m();
        let ne = ext.n_lines();
        let nloc = p.len(1);
        let mut big = DenseComplexMatrix::zeros((ne + nloc) * m, (ne + nloc) * m);
        let ext_rev = {
            let d = ext.to_dense();
            // reverse line order so the deepest PML line comes first
            DenseComplexMatrix::from_fn(ne * m, ne * m, |r, c| d[((ne - 1 - r / m) * m + r % m, (ne - 1 - c / m) * m + c % m)])
        };
        big.set_block(0, 0, &ext_rev);
        big.set_block(ne * m, ne * m, &op.block_system(line, p.ends[1]).to_dense());
        for q in 0..m {
            let i = (ne - 1) * m + q;
            let k = ne * m + q;
            big[(i, k)] = ctil[q];
            big[(k, i)] = ctil[q];
            big[(k, k)] += op.xcoup[line - 1][q] - ctil[q];
        }
        let f = random_source(&op, 2);
        let fl = p.restrict(1, &f);
        let mut fbig = vec![C64::new(0.0, 0.0); ne * m];
        fbig.extend_from_slice(&fl);
        let u1 = dense_lu_factor(&folded).unwrap().solve(&fl);
        let u2 = dense_lu_factor(&big).unwrap().solve(&fbig);
        let err = u1.iter().zip(&u2[ne * m..]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = u1.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "{err} {scale}");
    }

    #[test]
    fn robin_block_shape() {
        let bc = BoundarySpec::guide(BoundaryCondition::Dirichlet);
        let (g, med, op, _) = setup(7, 0.0, bc);
        let p = make_strip_partition(&op, 2, 0).unwrap();
        let s = robin_operator(&op, &p, 1, IfaceSide::Left).unwrap().matrix.unwrap();
        let h = g.h;
        let k = med.layer_k(0);
        let expected = C64::new(-1.0 / (h * h) - 1.0 / (h * h) + 0.5 * k * k, k / h);
        assert!((s[(3, 3)] - expected).norm() < 1e-9);
        assert_eq!(s[(0, 2)], C64::new(0.0, 0.0));
        assert!((s[(3, 4)] - C64::new(0.5 / (h * h), 0.0)).norm() < 1e-9);
    }
}
