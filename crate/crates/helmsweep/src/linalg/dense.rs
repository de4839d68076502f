use num_complex::Complex64 as C64;
use std::ops::{Index, IndexMut};

use super::LinalgError;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseComplexMatrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseComplexMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [C64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = dot(self.row(r), x);
        }
    }

    /// `y += self · x`.
    pub fn matvec_add(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            *yr += dot(self.row(r), x);
        }
    }

    pub fn matmul(&self, other: &DenseComplexMatrix) -> DenseComplexMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                axpy(a, other.row(k), orow);
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseComplexMatrix {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn add(&self, other: &DenseComplexMatrix) -> DenseComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        DenseComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &DenseComplexMatrix) -> DenseComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> DenseComplexMatrix {
        let data = self.data.iter().map(|a| a * s).collect();
        DenseComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// `diag(l) · self · diag(r)`.
    pub fn scale_rows_cols(&self, l: &[C64], r: &[C64]) -> DenseComplexMatrix {
        assert_eq!(l.len(), self.rows);
        assert_eq!(r.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| l[i] * self[(i, j)] * r[j])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Block `[r0, r0+nr) × [c0, c0+nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> DenseComplexMatrix {
        Self::from_fn(nr, nc, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &DenseComplexMatrix) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)];
            }
        }
    }

    /// In-place Gauss–Jordan inversion with partial pivoting.
    pub fn inverse(&self) -> Result<DenseComplexMatrix, LinalgError> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let tol = singular_tolerance(n) * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(pmax > tol) {
                return Err(LinalgError::Singular { index: k, pivot: pmax.max(0.0) });
            }
            if p != k {
                swap_rows(&mut a.data, n, p, k);
                perm.swap(p, k);
            }
            let inv = ONE / a[(k, k)];
            a[(k, k)] = ONE;
            for v in a.row_mut(k) {
                *v *= inv;
            }
            let pivot_row: Vec<C64> = a.row(k).to_vec();
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f == ZERO {
                    continue;
                }
                a[(i, k)] = ZERO;
                axpy(-f, &pivot_row, a.row_mut(i));
            }
        }
        // row swaps on A become column swaps on the inverse
        let mut out = Self::zeros(n, n);
        for r in 0..n {
            for (k, &pk) in perm.iter().enumerate() {
                out[(r, pk)] = a[(r, k)];
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for DenseComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

fn swap_rows(data: &mut [C64], n: usize, a: usize, b: usize) {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (first, second) = data.split_at_mut(hi * n);
    first[lo * n..(lo + 1) * n].swap_with_slice(&mut second[..n]);
}

/// Pivots below this fraction of the largest entry count as zero.
pub fn singular_tolerance(n: usize) -> f64 {
    (n.max(1) as f64) * 64.0 * f64::EPSILON
}

#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re - x.im * y.im;
        im += x.re * y.im + x.im * y.re;
    }
    C64::new(re, im)
}

/// `y += a·x`.
#[inline]
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.re += a.re * xi.re - a.im * xi.im;
        yi.im += a.re * xi.im + a.im * xi.re;
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `PA = LU` with unit lower triangular `L`, stored compactly.
#[derive(Clone, Debug)]
pub struct LuFactors {
    n: usize,
    lu: DenseComplexMatrix,
    perm: Vec<usize>,
}

/// Partial-pivoting LU. Fails when a pivot falls below working precision.
pub fn dense_lu_factor(m: &DenseComplexMatrix) -> Result<LuFactors, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare(m.rows(), m.cols()));
    }
    let n = m.rows();
    let mut a = m.clone();
    let tol = singular_tolerance(n) * a.max_abs().max(f64::MIN_POSITIVE);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !(pmax > tol) {
            return Err(LinalgError::Singular { index: k, pivot: pmax.max(0.0) });
        }
        if p != k {
            swap_rows(&mut a.data, n, p, k);
            perm.swap(p, k);
        }
        let inv = ONE / a[(k, k)];
        let pivot_tail: Vec<C64> = a.row(k)[k + 1..].to_vec();
        for i in k + 1..n {
            let l = a[(i, k)] * inv;
            a[(i, k)] = l;
            if l != ZERO {
                axpy(-l, &pivot_tail, &mut a.row_mut(i)[k + 1..]);
            }
        }
    }
    Ok(LuFactors { n, lu: a, perm })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn l(&self) -> DenseComplexMatrix {
        DenseComplexMatrix::from_fn(self.n, self.n, |r, c| match r.cmp(&c) {
            std::cmp::Ordering::Greater => self.lu[(r, c)],
            std::cmp::Ordering::Equal => ONE,
            std::cmp::Ordering::Less => ZERO,
        })
    }

    pub fn u(&self) -> DenseComplexMatrix {
        DenseComplexMatrix::from_fn(self.n, self.n, |r, c| if r <= c { self.lu[(r, c)] } else { ZERO })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..self.n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..self.n).rev() {
            let s = dot(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_matrix(&self, b: &DenseComplexMatrix) -> DenseComplexMatrix {
        let mut out = DenseComplexMatrix::zeros(b.rows(), b.cols());
        for c in 0..b.cols() {
            let col: Vec<C64> = (0..b.rows()).map(|r| b[(r, c)]).collect();
            for (r, v) in self.solve(&col).into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> DenseComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn identity_factors_trivially() {
        let lu = dense_lu_factor(&DenseComplexMatrix::identity(5)).unwrap();
        assert_eq!(lu.l(), DenseComplexMatrix::identity(5));
        assert_eq!(lu.u(), DenseComplexMatrix::identity(5));
    }

    #[test]
    fn lu_reconstructs_random_matrix() {
        let m = random(50, 3);
        let lu = dense_lu_factor(&m).unwrap();
        let prod = lu.l().matmul(&lu.u());
        let mut pm = DenseComplexMatrix::zeros(50, 50);
        for (i, &p) in lu.permutation().iter().enumerate() {
            for c in 0..50 {
                pm[(i, c)] = m[(p, c)];
            }
        }
        assert!(prod.sub(&pm).frobenius() / m.frobenius() <= 1e-13);
    }

    #[test]
    fn inverse_matches_lu_solve() {
        let m = random(30, 7);
        let inv = m.inverse().unwrap();
        let e = m.matmul(&inv).sub(&DenseComplexMatrix::identity(30));
        assert!(e.max_abs() < 1e-12);
        let b: Vec<C64> = (0..30).map(|i| C64::new(i as f64, 1.0)).collect();
        let x1 = inv.matvec(&b);
        let x2 = dense_lu_factor(&m).unwrap().solve(&b);
        let d: Vec<C64> = x1.iter().zip(&x2).map(|(a, b)| a - b).collect();
        assert!(norm2(&d) / norm2(&x2) < 1e-12);
    }

    #[test]
    fn resonant_helmholtz_block_is_singular() {
        // 2x2 Dirichlet grid, h = 1/3: the lowest Laplacian eigenvalue is -18
        let h2 = 9.0;
        let k2 = 18.0;
        let d = C64::new(-4.0 * h2 + k2, 0.0);
        let o = C64::new(h2, 0.0);
        let z = ZERO;
        let m = DenseComplexMatrix::from_row_major(4, 4, vec![d, o, o, z, o, d, z, o, o, z, d, o, z, o, o, d]);
        assert!(matches!(dense_lu_factor(&m), Err(LinalgError::Singular { .. })));
        assert!(matches!(m.inverse(), Err(LinalgError::Singular { .. })));
    }
}
