//! Five-point Helmholtz operator in gridline-major (x-line) ordering.
//!
//! Unknown `(p, q)` (line position `p` along x, row position `q` along y)
//! has global index `p·m + q`. Every row of the stretched operator is
//! multiplied by `sx·sy` and by the Robin half weights, which keeps the
//! matrix complex symmetric:
//!
//! * x-coupling `(p,q)–(p+1,q)`: `wy·sy / (sx(p+½)·h²)`
//! * y-coupling `(p,q)–(p,q+1)`: `wx·sx / (sy(q+½)·h²)`
//! * diagonal: minus every coupling (eliminated Dirichlet neighbours
//!   included), minus `wy·sy·p0/h` per Robin x-side and `wx·sx·p0/h` per
//!   Robin y-side, plus `wx·wy·sx·sy·k²`.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{BlockTriSystem, DenseComplexMatrix};
use crate::mesh::{BoundaryCondition, BoundarySpec, Grid2D, MediumProfile, MeshError, PmlSpec};

#[derive(Debug, Error, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("a PML side requires a PmlSpec and a PmlSpec requires a PML side")]
    PmlMismatch,
    #[error("unsupported boundary combination: {0}")]
    Unsupported(String),
    #[error("vector length {got} does not match operator dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot parse field dump: {0}")]
    Parse(String),
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// One gridline (or, on the y axis, one row) of the layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisNode {
    /// Physical grid index: coordinate `idx·h`, may be negative in a PML.
    pub idx: i64,
    /// Complex stretch at the node (1 outside PMLs).
    pub s: C64,
    /// ½ on Robin boundary nodes, 1 elsewhere.
    pub w: f64,
    /// Robin boundary node (needs the `p0/h` closure term).
    pub robin: bool,
    /// Inside `[0, 1]` and not part of a PML.
    pub physical: bool,
}

/// Nodes along one axis plus the stretches at the half points between
/// them. `ghost_lo`/`ghost_hi` are the half-point stretches towards an
/// eliminated Dirichlet neighbour, `None` when the end node is a Robin
/// boundary node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub nodes: Vec<AxisNode>,
    pub half: Vec<C64>,
    pub ghost_lo: Option<C64>,
    pub ghost_hi: Option<C64>,
}

impl Axis {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of physical index `idx`.
    pub fn position(&self, idx: i64) -> Option<usize> {
        let first = self.nodes.first()?.idx;
        let p = idx - first;
        (p >= 0 && (p as usize) < self.nodes.len()).then_some(p as usize)
    }

    /// Axis for `n` interior points with the two given end conditions.
    pub fn build(n: usize, h: f64, lo: BoundaryCondition, hi: BoundaryCondition, pml: Option<&PmlSpec>) -> Axis {
        let end = n as i64 + 1;
        let first = match lo {
            BoundaryCondition::Dirichlet => 1,
            BoundaryCondition::Robin => 0,
            BoundaryCondition::Pml(w) => 1 - w as i64,
        };
        let last = match hi {
            BoundaryCondition::Dirichlet => n as i64,
            BoundaryCondition::Robin => end,
            BoundaryCondition::Pml(w) => n as i64 + w as i64,
        };
        // depth into the PML on either side, in units of h
        let depth = |t: f64| -> f64 {
            if t <= 0.0 && matches!(lo, BoundaryCondition::Pml(_)) {
                -t
            } else if t >= end as f64 && matches!(hi, BoundaryCondition::Pml(_)) {
                t - end as f64
            } else {
                0.0
            }
        };
        let stretch = |t: f64| -> C64 {
            let d = depth(t);
            if d <= 0.0 {
                return ONE;
            }
            pml.expect("PML side without PmlSpec").stretch(d * h, h)
        };
        let in_pml = |i: i64| -> bool {
            (i <= 0 && matches!(lo, BoundaryCondition::Pml(_))) || (i >= end && matches!(hi, BoundaryCondition::Pml(_)))
        };
        let nodes = (first..=last)
            .map(|i| {
                let robin = (i == 0 && lo == BoundaryCondition::Robin) || (i == end && hi == BoundaryCondition::Robin);
                AxisNode {
                    idx: i,
                    s: stretch(i as f64),
                    w: if robin { 0.5 } else { 1.0 },
                    robin,
                    physical: !in_pml(i),
                }
            })
            .collect();
        let half = (first..last).map(|i| stretch(i as f64 + 0.5)).collect();
        let ghost_lo = (lo != BoundaryCondition::Robin).then(|| stretch(first as f64 - 0.5));
        let ghost_hi = (hi != BoundaryCondition::Robin).then(|| stretch(last as f64 + 0.5));
        Axis { nodes, half, ghost_lo, ghost_hi }
    }
}

/// How the wavenumber is assigned to x-lines.
#[derive(Clone, Debug, PartialEq)]
pub enum MediumOverride {
    /// The layered profile, extended by constants outside `[0, 1]`.
    None,
    /// A constant wavenumber everywhere (identity extension of one layer).
    Constant(f64),
}

/// Assembled operator together with its layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseOperator {
    pub h: f64,
    pub xaxis: Axis,
    pub yaxis: Axis,
    /// Wavenumber per x-line.
    pub k: Vec<f64>,
    /// Robin coefficient `p0` per x-line (used on Robin nodes).
    pub p0: Vec<C64>,
    /// Main diagonal of each line block.
    pub main: Vec<Vec<C64>>,
    /// Couplings inside each line block, between rows `q` and `q+1`.
    pub ycoup: Vec<Vec<C64>>,
    /// Couplings between line `p` and `p+1`, per row.
    pub xcoup: Vec<Vec<C64>>,
}

/// Global Helmholtz operator on the unit square.
pub fn assemble_helmholtz(
    grid: &Grid2D,
    medium: &MediumProfile,
    bc: &BoundarySpec,
    pml: Option<&PmlSpec>,
) -> Result<SparseOperator, AssemblyError> {
    assemble_truncated(grid, medium, &MediumOverride::None, bc, pml)
}

/// Global operator with an optional medium override; restricting the
/// result to a line range gives the exterior systems whose elimination
/// yields interface operators.
pub fn assemble_truncated(
    grid: &Grid2D,
    medium: &MediumProfile,
    over: &MediumOverride,
    bc: &BoundarySpec,
    pml: Option<&PmlSpec>,
) -> Result<SparseOperator, AssemblyError> {
    medium.validate()?;
    if bc.has_pml() != pml.is_some() {
        return Err(AssemblyError::PmlMismatch);
    }
    if bc.pml_widths().contains(&0) {
        return Err(AssemblyError::Unsupported("PML of width 0".into()));
    }
    let xaxis = Axis::build(grid.nx, grid.h, bc.left, bc.right, pml);
    let yaxis = Axis::build(grid.ny, grid.h, bc.bottom, bc.top, pml);
    let k: Vec<f64> = xaxis
        .nodes
        .iter()
        .map(|n| match over {
            MediumOverride::None => medium.k_clamped(grid.x(n.idx)),
            MediumOverride::Constant(kc) => *kc,
        })
        .collect();
    let p0 = k.iter().map(|&kk| bc.robin_coefficient.unwrap_or(C64::new(0.0, -kk))).collect();
    Ok(SparseOperator::from_axes(grid.h, xaxis, yaxis, k, p0))
}

impl SparseOperator {
    /// Assemble from explicit axes, per-line wavenumbers and Robin coefficients.
    pub fn from_axes(h: f64, xaxis: Axis, yaxis: Axis, k: Vec<f64>, p0: Vec<C64>) -> SparseOperator {
        let nl = xaxis.len();
        let m = yaxis.len();
        let h2 = h * h;
        let xc = |q: usize, s_half: C64| -> C64 {
            let y = &yaxis.nodes[q];
            y.w * y.s / (s_half * h2)
        };
        let yc = |p: usize, s_half: C64| -> C64 {
            let x = &xaxis.nodes[p];
            x.w * x.s / (s_half * h2)
        };
        let xcoup: Vec<Vec<C64>> = (0..nl.saturating_sub(1))
            .map(|p| (0..m).map(|q| xc(q, xaxis.half[p])).collect())
            .collect();
        let mut ycoup = Vec::with_capacity(nl);
        let mut main = Vec::with_capacity(nl);
        for p in 0..nl {
            let xn = &xaxis.nodes[p];
            let yc_line: Vec<C64> = (0..m.saturating_sub(1)).map(|q| yc(p, yaxis.half[q])).collect();
            let mut d = vec![ZERO; m];
            for q in 0..m {
                let yn = &yaxis.nodes[q];
                let mut v = C64::new(xn.w * yn.w * k[p] * k[p], 0.0) * xn.s * yn.s;
                // x neighbours
                if p > 0 {
                    v -= xcoup[p - 1][q];
                } else if let Some(g) = xaxis.ghost_lo {
                    v -= xc(q, g);
                }
                if p + 1 < nl {
                    v -= xcoup[p][q];
                } else if let Some(g) = xaxis.ghost_hi {
                    v -= xc(q, g);
                }
                // y neighbours
                if q > 0 {
                    v -= yc_line[q - 1];
                } else if let Some(g) = yaxis.ghost_lo {
                    v -= yc(p, g);
                }
                if q + 1 < m {
                    v -= yc_line[q];
                } else if let Some(g) = yaxis.ghost_hi {
                    v -= yc(p, g);
                }
                if xn.robin {
                    v -= yn.w * yn.s * p0[p] / h;
                }
                if yn.robin {
                    v -= xn.w * xn.s * p0[p] / h;
                }
                d[q] = v;
            }
            ycoup.push(yc_line);
            main.push(d);
        }
        SparseOperator { h, xaxis, yaxis, k, p0, main, ycoup, xcoup }
    }

    /// Unknowns per gridline.
    pub fn m(&self) -> usize {
        self.yaxis.len()
    }

    pub fn n_lines(&self) -> usize {
        self.xaxis.len()
    }

    pub fn dim(&self) -> usize {
        self.m() * self.n_lines()
    }

    /// Line positions that belong to a PML.
    pub fn pml_lines(&self) -> Vec<usize> {
        (0..self.n_lines()).filter(|&p| !self.xaxis.nodes[p].physical).collect()
    }

    /// Whether node `(p, q)` is physical (source-carrying).
    pub fn is_physical(&self, p: usize, q: usize) -> bool {
        self.xaxis.nodes[p].physical && self.yaxis.nodes[q].physical
    }

    /// Row scaling `wx·wy` applied to sources at physical nodes, 0 in PMLs.
    pub fn source_weights(&self) -> Vec<f64> {
        let m = self.m();
        let mut w = vec![0.0; self.dim()];
        for p in 0..self.n_lines() {
            for q in 0..m {
                if self.is_physical(p, q) {
                    w[p * m + q] = self.xaxis.nodes[p].w * self.yaxis.nodes[q].w;
                }
            }
        }
        w
    }

    /// Dense diagonal block of line `p`.
    pub fn diag_block(&self, p: usize) -> DenseComplexMatrix {
        tridiag(&self.main[p], &self.ycoup[p])
    }

    /// `y = A v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>, AssemblyError> {
        if v.len() != self.dim() {
            return Err(AssemblyError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let mut y = vec![ZERO; v.len()];
        self.apply_lines_into(0..=self.n_lines() - 1, v, &mut y);
        Ok(y)
    }

    /// `A v` without the length check; panics on mismatch.
    pub fn mul(&self, v: &[C64]) -> Vec<C64> {
        self.apply(v).expect("dimension mismatch")
    }

    /// Rows of lines `range` of `A v` (global `v`), written into `y` at global positions.
    pub fn apply_lines_into(&self, range: RangeInclusive<usize>, v: &[C64], y: &mut [C64]) {
        let m = self.m();
        let nl = self.n_lines();
        for p in range {
            self.line_block_apply(p, &v[p * m..(p + 1) * m], &mut y[p * m..(p + 1) * m]);
            let yp = &mut y[p * m..(p + 1) * m];
            if p > 0 {
                for q in 0..m {
                    yp[q] += self.xcoup[p - 1][q] * v[(p - 1) * m + q];
                }
            }
            if p + 1 < nl {
                for q in 0..m {
                    yp[q] += self.xcoup[p][q] * v[(p + 1) * m + q];
                }
            }
        }
    }

    /// `y = D_p x` for the line block of `p`.
    pub fn line_block_apply(&self, p: usize, x: &[C64], y: &mut [C64]) {
        let m = self.m();
        let d = &self.main[p];
        let c = &self.ycoup[p];
        for q in 0..m {
            let mut v = d[q] * x[q];
            if q > 0 {
                v += c[q - 1] * x[q - 1];
            }
            if q + 1 < m {
                v += c[q] * x[q + 1];
            }
            y[q] = v;
        }
    }

    /// Block-tridiagonal view of lines `lo..=hi`.
    pub fn block_system(&self, lo: usize, hi: usize) -> BlockTriSystem {
        BlockTriSystem {
            m: self.m(),
            diag: (lo..=hi).map(|p| self.diag_block(p)).collect(),
            lower: (lo..hi).map(|p| self.xcoup[p].clone()).collect(),
            upper: (lo..hi).map(|p| self.xcoup[p].clone()).collect(),
        }
    }

    pub fn to_block_system(&self) -> BlockTriSystem {
        self.block_system(0, self.n_lines() - 1)
    }

    pub fn to_dense(&self) -> DenseComplexMatrix {
        self.to_block_system().to_dense()
    }

    /// Coordinate triplets `(row, col, value)` of the nonzero entries.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let m = self.m();
        let mut t = Vec::new();
        for p in 0..self.n_lines() {
            for q in 0..m {
                let r = p * m + q;
                if p > 0 {
                    t.push((r, r - m, self.xcoup[p - 1][q]));
                }
                if q > 0 {
                    t.push((r, r - 1, self.ycoup[p][q - 1]));
                }
                t.push((r, r, self.main[p][q]));
                if q + 1 < m {
                    t.push((r, r + 1, self.ycoup[p][q]));
                }
                if p + 1 < self.n_lines() {
                    t.push((r, r + m, self.xcoup[p][q]));
                }
            }
        }
        t
    }

    /// Text dump with one `row col re im` line per nonzero.
    pub fn dump_triplets(&self) -> String {
        let mut s = String::new();
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{r} {c} {:e} {:e}", v.re, v.im);
        }
        s
    }
}

impl crate::linalg::LinearMap for SparseOperator {
    fn dim(&self) -> usize {
        SparseOperator::dim(self)
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.mul(x)
    }
}

/// Dense symmetric tridiagonal matrix from a main diagonal and couplings.
pub fn tridiag(main: &[C64], off: &[C64]) -> DenseComplexMatrix {
    let m = main.len();
    let mut d = DenseComplexMatrix::zeros(m, m);
    for q in 0..m {
        d[(q, q)] = main[q];
        if q + 1 < m {
            d[(q, q + 1)] = off[q];
            d[(q + 1, q)] = off[q];
        }
    }
    d
}

/// Right-hand side from nodal source values `f` (physical nodes only).
pub fn weighted_source(op: &SparseOperator, f: &[C64]) -> Vec<C64> {
    op.source_weights().iter().zip(f).map(|(w, v)| v * *w).collect()
}

/// Complex standard normal source on the physical nodes, zero in PMLs.
pub fn random_source(op: &SparseOperator, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = op.source_weights();
    w.iter()
        .map(|&wi| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im) * wi
        })
        .collect()
}

/// Unit point source at physical grid point `(i, j)`.
pub fn point_source(op: &SparseOperator, i: i64, j: i64) -> Result<Vec<C64>, AssemblyError> {
    let p = op.xaxis.position(i);
    let q = op.yaxis.position(j);
    match (p, q) {
        (Some(p), Some(q)) if op.is_physical(p, q) => {
            let mut f = vec![ZERO; op.dim()];
            f[p * op.m() + q] = ONE * op.source_weights()[p * op.m() + q];
            Ok(f)
        }
        _ => Err(AssemblyError::Unsupported(format!("point ({i}, {j}) is not a physical unknown"))),
    }
}

fn format_cell(v: C64) -> String {
    format!("{:?}{}{:?}j", v.re, if v.im.is_sign_negative() { "" } else { "+" }, v.im)
}

fn parse_cell(s: &str) -> Result<C64, AssemblyError> {
    let err = || AssemblyError::Parse(s.to_string());
    let body = s.trim().strip_suffix('j').ok_or_else(err)?;
    let bytes = body.as_bytes();
    // the imaginary part starts at the last sign that is not an exponent sign
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(err)?;
    let re = body[..split].parse().map_err(|_| err())?;
    let im = body[split..].trim_start_matches('+').parse().map_err(|_| err())?;
    Ok(C64::new(re, im))
}

/// Field as CSV, one row per x-gridline, cells `re+imj` written losslessly.
/// The first column holds the physical line index.
pub fn dump_field(op: &SparseOperator, u: &[C64], include_pml: bool) -> Result<String, AssemblyError> {
    if u.len() != op.dim() {
        return Err(AssemblyError::DimensionMismatch { expected: op.dim(), got: u.len() });
    }
    let m = op.m();
    let rows: Vec<usize> = (0..m).filter(|&q| include_pml || op.yaxis.nodes[q].physical).collect();
    let mut s = String::from("line");
    for &q in &rows {
        let _ = write!(s, ",y{}", op.yaxis.nodes[q].idx);
    }
    s.push('\n');
    for p in 0..op.n_lines() {
        if !include_pml && !op.xaxis.nodes[p].physical {
            continue;
        }
        let _ = write!(s, "{}", op.xaxis.nodes[p].idx);
        for &q in &rows {
            let _ = write!(s, ",{}", format_cell(u[p * m + q]));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Parse a field dump back into `(line index, values)` rows.
pub fn parse_field(text: &str) -> Result<Vec<(i64, Vec<C64>)>, AssemblyError> {
    let mut out = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let mut cells = line.split(',');
        let idx = cells
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| AssemblyError::Parse(line.to_string()))?;
        let vals = cells.map(parse_cell).collect::<Result<Vec<_>, _>>()?;
        out.push((idx, vals));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, layered_wavenumber};

    fn constant_op(n: usize, k: f64, bc: BoundarySpec, pml: Option<usize>) -> SparseOperator {
        let g = build_grid(n, n).unwrap();
        let spec = pml.map(|w| PmlSpec::new(w, g.h, k));
        assemble_helmholtz(&g, &MediumProfile::constant(k), &bc, spec.as_ref()).unwrap()
    }

    #[test]
    fn interior_diagonal_is_stencil_value() {
        let op = constant_op(63, 20.0, BoundarySpec::dirichlet(), None);
        assert_eq!(op.dim(), 3969);
        let d = op.main[30][30];
        assert!((d.re - (-4.0 * 64.0 * 64.0 + 400.0)).abs() < 1e-9 && d.im == 0.0);
    }

    /// Brute-force five-point matrix built node by node.
    fn stencil_oracle(n: usize, k: &dyn Fn(usize) -> f64) -> DenseComplexMatrix {
        let h = 1.0 / (n as f64 + 1.0);
        let id = |i: usize, j: usize| i * n + j;
        let mut a = DenseComplexMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                a[(id(i, j), id(i, j))] = C64::new(-4.0 / (h * h) + k(i) * k(i), 0.0);
                if i > 0 {
                    a[(id(i, j), id(i - 1, j))] = C64::new(1.0 / (h * h), 0.0);
                }
                if i + 1 < n {
                    a[(id(i, j), id(i + 1, j))] = C64::new(1.0 / (h * h), 0.0);
                }
                if j > 0 {
                    a[(id(i, j), id(i, j - 1))] = C64::new(1.0 / (h * h), 0.0);
                }
                if j + 1 < n {
                    a[(id(i, j), id(i, j + 1))] = C64::new(1.0 / (h * h), 0.0);
                }
            }
        }
        a
    }

    #[test]
    fn dirichlet_operator_matches_stencil_oracle() {
        let op = constant_op(4, 3.0, BoundarySpec::dirichlet(), None);
        let oracle = stencil_oracle(4, &|_| 3.0);
        assert!(op.to_dense().sub(&oracle).max_abs() <= 1e-15 * oracle.max_abs());

        let g = build_grid(11, 11).unwrap();
        let med = layered_wavenumber(&[5.0; 4], &[0.0, 4.0, 2.0, -2.0], 1.0, 1).unwrap();
        let op = assemble_helmholtz(&g, &med, &BoundarySpec::dirichlet(), None).unwrap();
        let oracle = stencil_oracle(11, &|i| med.k_clamped(g.x(i as i64 + 1)));
        assert!(op.to_dense().sub(&oracle).max_abs() < 1e-9);
    }

    #[test]
    fn robin_operator_matches_ghost_point_oracle() {
        // one-dimensional check on the boundary line: ghost u_{-1} = u_1 - 2h p0 u_0
        let n = 5;
        let k = 4.0;
        let op = constant_op(n, k, BoundarySpec::guide(BoundaryCondition::Robin), None);
        let h = op.h;
        let p0 = C64::new(0.0, -k);
        // halved boundary row of the ghost-eliminated stencil
        let expected = 0.5 * (C64::new(-4.0 / (h * h) + k * k, 0.0) - 2.0 * h * p0 / (h * h));
        assert!((op.main[0][2] - expected).norm() < 1e-9);
        assert!((op.xcoup[0][2] - C64::new(1.0 / (h * h), 0.0)).norm() < 1e-9);
        assert!((op.ycoup[0][2] - C64::new(0.5 / (h * h), 0.0)).norm() < 1e-9);
    }

    #[test]
    fn operators_are_complex_symmetric() {
        for bc in [
            BoundarySpec::guide(BoundaryCondition::Robin),
            BoundarySpec::open(BoundaryCondition::Robin),
            BoundarySpec::guide(BoundaryCondition::Pml(3)),
            BoundarySpec::open(BoundaryCondition::Pml(3)),
        ] {
            let op = constant_op(7, 6.0, bc, bc.left.pml_width());
            let a = op.to_dense();
            assert!(a.sub(&a.transpose()).max_abs() <= 1e-14 * a.max_abs());
        }
    }

    #[test]
    fn pml_layout_has_expected_lines() {
        let op = constant_op(7, 6.0, BoundarySpec::guide(BoundaryCondition::Pml(3)), Some(3));
        let idx: Vec<i64> = op.xaxis.nodes.iter().map(|n| n.idx).collect();
        assert_eq!(idx, (-2..=10).collect::<Vec<_>>());
        assert_eq!(op.pml_lines(), vec![0, 1, 2, 10, 11, 12]);
        assert_eq!(op.m(), 7);
        let f = random_source(&op, 1);
        assert!(f[..3 * 7].iter().all(|v| *v == ZERO));
        assert!(f[3 * 7..4 * 7].iter().all(|v| *v != ZERO));
    }

    #[test]
    fn apply_matches_dense_columns() {
        let op = constant_op(6, 5.0, BoundarySpec::open(BoundaryCondition::Pml(2)), Some(2));
        let a = op.to_dense();
        let n = op.dim();
        assert!(op.mul(&vec![ZERO; n]).iter().all(|v| *v == ZERO));
        for col in [0, 7, n / 2, n - 1] {
            let mut e = vec![ZERO; n];
            e[col] = ONE;
            let y = op.mul(&e);
            for r in 0..n {
                assert_eq!(y[r], a[(r, col)]);
            }
        }
        assert!(matches!(op.apply(&[ONE]), Err(AssemblyError::DimensionMismatch { .. })));
    }

    #[test]
    fn field_dump_round_trips() {
        let op = constant_op(4, 2.0, BoundarySpec::guide(BoundaryCondition::Pml(2)), Some(2));
        let u = random_source(&op, 9).iter().map(|v| v * C64::new(1.0 / 3.0, -1e-300)).collect::<Vec<_>>();
        let text = dump_field(&op, &u, true).unwrap();
        let rows = parse_field(&text).unwrap();
        let back: Vec<C64> = rows.into_iter().flat_map(|(_, v)| v).collect();
        assert_eq!(back, u);
        let zero = dump_field(&op, &vec![ZERO; op.dim()], false).unwrap();
        let rows = parse_field(&zero).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|(_, v)| v.len() == 4 && v.iter().all(|c| *c == ZERO)));
    }

    #[test]
    fn pml_requires_spec() {
        let g = build_grid(4, 4).unwrap();
        let r = assemble_helmholtz(&g, &MediumProfile::constant(1.0), &BoundarySpec::guide(BoundaryCondition::Pml(2)), None);
        assert_eq!(r, Err(AssemblyError::PmlMismatch));
    }
}
