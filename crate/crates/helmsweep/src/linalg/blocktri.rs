use num_complex::Complex64 as C64;

use super::dense::DenseComplexMatrix;
use super::LinalgError;

/// Block tridiagonal system with dense diagonal blocks and diagonal
/// off-diagonal couplings, which is the shape every line-ordered
/// five-point operator (and its subdomain variants) takes.
#[derive(Clone, Debug)]
pub struct BlockTriSystem {
    pub m: usize,
    pub diag: Vec<DenseComplexMatrix>,
    /// `lower[i]`: block (i+1, i), stored as its diagonal.
    pub lower: Vec<Vec<C64>>,
    /// `upper[i]`: block (i, i+1), stored as its diagonal.
    pub upper: Vec<Vec<C64>>,
}

impl BlockTriSystem {
    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.m * self.diag.len()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let m = self.m;
        assert_eq!(x.len(), self.dim());
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        for i in 0..self.n_blocks() {
            let yi = &mut y[i * m..(i + 1) * m];
            self.diag[i].matvec_add(&x[i * m..(i + 1) * m], yi);
            if i > 0 {
                for r in 0..m {
                    yi[r] += self.lower[i - 1][r] * x[(i - 1) * m + r];
                }
            }
            if i + 1 < self.n_blocks() {
                for r in 0..m {
                    yi[r] += self.upper[i][r] * x[(i + 1) * m + r];
                }
            }
        }
        y
    }

    pub fn to_dense(&self) -> DenseComplexMatrix {
        let m = self.m;
        let mut a = DenseComplexMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.n_blocks() {
            a.set_block(i * m, i * m, &self.diag[i]);
            if i + 1 < self.n_blocks() {
                for r in 0..m {
                    a[((i + 1) * m + r, i * m + r)] = self.lower[i][r];
                    a[(i * m + r, (i + 1) * m + r)] = self.upper[i][r];
                }
            }
        }
        a
    }
}

/// `d -= diag(l) · tinv · diag(u)`, the Schur update of one block.
pub fn eliminate_block(d: &mut DenseComplexMatrix, l: &[C64], tinv: &DenseComplexMatrix, u: &[C64]) {
    let m = d.rows();
    for r in 0..m {
        let lr = l[r];
        let trow = tinv.row(r);
        let drow = d.row_mut(r);
        for c in 0..m {
            drow[c] -= lr * trow[c] * u[c];
        }
    }
}

/// The recurrence `T_1 = D_1`, `T_j = D_j − L_{j−1} T_{j−1}⁻¹ U_{j−1}`,
/// returning every `T_j` (used for checks and Schur complements).
pub fn schur_recurrence(sys: &BlockTriSystem) -> Result<Vec<DenseComplexMatrix>, LinalgError> {
    let mut ts: Vec<DenseComplexMatrix> = Vec::with_capacity(sys.n_blocks());
    for i in 0..sys.n_blocks() {
        let mut t = sys.diag[i].clone();
        if i > 0 {
            let tinv = ts[i - 1].inverse().map_err(|e| e.at_block(i - 1))?;
            eliminate_block(&mut t, &sys.lower[i - 1], &tinv, &sys.upper[i - 1]);
        }
        ts.push(t);
    }
    Ok(ts)
}

/// Factored block tridiagonal system holding `T_j⁻¹` for every block.
#[derive(Clone, Debug)]
pub struct SchurSequence {
    m: usize,
    tinv: Vec<DenseComplexMatrix>,
    lower: Vec<Vec<C64>>,
    upper: Vec<Vec<C64>>,
}

pub fn block_tridiag_factor(sys: &BlockTriSystem) -> Result<SchurSequence, LinalgError> {
    let mut tinv: Vec<DenseComplexMatrix> = Vec::with_capacity(sys.n_blocks());
    for i in 0..sys.n_blocks() {
        let mut t = sys.diag[i].clone();
        if i > 0 {
            eliminate_block(&mut t, &sys.lower[i - 1], &tinv[i - 1], &sys.upper[i - 1]);
        }
        tinv.push(t.inverse().map_err(|e| e.at_block(i))?);
    }
    Ok(SchurSequence { m: sys.m, tinv, lower: sys.lower.clone(), upper: sys.upper.clone() })
}

impl SchurSequence {
    pub fn n_blocks(&self) -> usize {
        self.tinv.len()
    }

    pub fn dim(&self) -> usize {
        self.m * self.tinv.len()
    }

    pub fn t_inverse(&self, j: usize) -> &DenseComplexMatrix {
        &self.tinv[j]
    }

    /// Forward substitution: `T_j v_j = f_j − L_{j−1} v_{j−1}`.
    pub fn forward(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.dim(), "right-hand side has the wrong length");
        let m = self.m;
        let mut v = vec![C64::new(0.0, 0.0); f.len()];
        let mut rhs = vec![C64::new(0.0, 0.0); m];
        for i in 0..self.n_blocks() {
            rhs.copy_from_slice(&f[i * m..(i + 1) * m]);
            if i > 0 {
                for r in 0..m {
                    rhs[r] -= self.lower[i - 1][r] * v[(i - 1) * m + r];
                }
            }
            self.tinv[i].matvec_into(&rhs, &mut v[i * m..(i + 1) * m]);
        }
        v
    }

    /// The transferred sources `f̃_j = T_j v_j`, i.e. `f_j − L_{j−1} v_{j−1}`.
    pub fn transferred_sources(&self, f: &[C64]) -> Vec<C64> {
        let m = self.m;
        let v = self.forward(f);
        let mut ft = f.to_vec();
        for i in 1..self.n_blocks() {
            for r in 0..m {
                ft[i * m + r] -= self.lower[i - 1][r] * v[(i - 1) * m + r];
            }
        }
        ft
    }

    /// Backward substitution: `u_j = v_j − T_j⁻¹ U_j u_{j+1}`.
    pub fn backward(&self, mut v: Vec<C64>) -> Vec<C64> {
        let m = self.m;
        let mut tmp = vec![C64::new(0.0, 0.0); m];
        let mut corr = vec![C64::new(0.0, 0.0); m];
        for i in (0..self.n_blocks().saturating_sub(1)).rev() {
            for r in 0..m {
                tmp[r] = self.upper[i][r] * v[(i + 1) * m + r];
            }
            self.tinv[i].matvec_into(&tmp, &mut corr);
            for r in 0..m {
                v[i * m + r] -= corr[r];
            }
        }
        v
    }

    pub fn solve(&self, f: &[C64]) -> Vec<C64> {
        self.backward(self.forward(f))
    }
}

/// Exact block LU solve of `A u = f` through a factored sequence.
pub fn block_lu_solve(seq: &SchurSequence, f: &[C64]) -> Result<Vec<C64>, LinalgError> {
    if f.len() != seq.dim() {
        return Err(LinalgError::DimensionMismatch { expected: seq.dim(), got: f.len() });
    }
    Ok(seq.solve(f))
}
