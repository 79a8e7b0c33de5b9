//! Fixed-capacity dense vectors and matrices for parameter dimensions up to
//! three.
//!
//! Every model in this crate has at most three parameters, so information
//! matrices live on the stack and determinants/inverses use closed-form
//! cofactor expansions. [`Matrix::log_det_lu`] is a generic LU path kept for
//! cross-checking.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Largest supported parameter dimension.
pub const MAX_DIM: usize = 3;

/// Ratio `|det| / prod |a_ii|` below which a matrix is treated as singular.
///
/// Rank-deficient matrices assembled in floating point land around 1e-16 on
/// this scale; genuine designs stay many orders above it.
pub const SINGULAR_RTOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector {
    data: [f64; MAX_DIM],
    len: usize,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&len),
            "vector length {len} out of range"
        );
        Self {
            data: [0.0; MAX_DIM],
            len,
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len, other.len);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        for v in &mut out.data[..self.len] {
            *v *= factor;
        }
        out
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        let len = self.len;
        &mut self.data[..len][i]
    }
}

/// Square matrix of dimension `1..=MAX_DIM`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix {
    data: [[f64; MAX_DIM]; MAX_DIM],
    dim: usize,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "matrix dimension {dim} out of range"
        );
        Self {
            data: [[0.0; MAX_DIM]; MAX_DIM],
            dim,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i][i] = *v;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), rows.len(), "matrix must be square");
            m.data[i][..row.len()].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i][..self.dim]
    }

    /// `self += weight * v v^T`.
    pub fn add_outer(&mut self, weight: f64, v: &Vector) {
        debug_assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let wi = weight * v[i];
            for j in 0..self.dim {
                self.data[i][j] += wi * v[j];
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] *= factor;
            }
        }
        m
    }

    pub fn add(&self, other: &Matrix) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] += other.data[i][j];
            }
        }
        m
    }

    pub fn mul(&self, other: &Matrix) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i][j] = (0..n).map(|k| self.data[i][k] * other.data[k][j]).sum();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for i in 0..n {
            out[i] = (0..n).map(|k| self.data[i][k] * v[k]).sum();
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = self.data[j][i];
            }
        }
        m
    }

    /// Replaces the matrix by `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let avg = 0.5 * (self.data[i][j] + self.data[j][i]);
                m.data[i][j] = avg;
                m.data[j][i] = avg;
            }
        }
        m
    }

    /// Largest absolute difference `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.data[i][j] - self.data[j][i]).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i][i]).sum()
    }

    /// Determinant by closed-form cofactor expansion.
    pub fn det(&self) -> f64 {
        let a = &self.data;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    fn diag_scale(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i][i].abs()).product()
    }

    /// True when the determinant is negligible relative to the diagonal.
    pub fn is_numerically_singular(&self) -> bool {
        let det = self.det();
        let scale = self.diag_scale();
        !det.is_finite() || scale == 0.0 || det.abs() <= SINGULAR_RTOL * scale
    }

    /// Inverse through the adjugate.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.is_numerically_singular() {
            return Err(Error::SingularMatrix(format!(
                "{}x{} matrix with determinant {:e}",
                self.dim,
                self.dim,
                self.det()
            )));
        }
        let det = self.det();
        let a = &self.data;
        let mut inv = Self::zeros(self.dim);
        match self.dim {
            1 => inv.data[0][0] = 1.0 / a[0][0],
            2 => {
                inv.data[0][0] = a[1][1] / det;
                inv.data[0][1] = -a[0][1] / det;
                inv.data[1][0] = -a[1][0] / det;
                inv.data[1][1] = a[0][0] / det;
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        // cofactor C_ji goes to position (i, j)
                        let (r0, r1) = other_two(j);
                        let (c0, c1) = other_two(i);
                        let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        inv.data[i][j] = sign * minor / det;
                    }
                }
            }
        }
        Ok(inv)
    }

    /// `v^T A^{-1} v`.
    pub fn inverse_quad_form(&self, v: &Vector) -> Result<f64> {
        let inv = self.inverse()?;
        Ok(v.dot(&inv.mul_vec(v)))
    }

    /// `log det` via the closed-form determinant.
    ///
    /// Singular or indefinite input yields [`Error::NonPositiveDeterminant`].
    pub fn log_det(&self) -> Result<f64> {
        let det = self.det();
        if !(det > 0.0) || self.is_numerically_singular() {
            return Err(Error::NonPositiveDeterminant(det));
        }
        Ok(det.ln())
    }

    /// `log det` through an LU factorisation with partial pivoting.
    pub fn log_det_lu(&self) -> Result<f64> {
        let n = self.dim;
        let mut a = self.data;
        let mut sign = 1.0;
        let mut log_abs = 0.0;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap_or(k);
            if a[pivot][k] == 0.0 {
                return Err(Error::NonPositiveDeterminant(0.0));
            }
            if pivot != k {
                a.swap(pivot, k);
                sign = -sign;
            }
            let p = a[k][k];
            if p < 0.0 {
                sign = -sign;
            }
            log_abs += p.abs().ln();
            for i in (k + 1)..n {
                let f = a[i][k] / p;
                let (top, bottom) = a.split_at_mut(i);
                for (aij, akj) in bottom[0][k..n].iter_mut().zip(&top[k][k..n]) {
                    *aij -= f * akj;
                }
            }
        }
        if sign < 0.0 {
            return Err(Error::NonPositiveDeterminant(-log_abs.exp()));
        }
        Ok(log_abs)
    }
}

/// Upper-triangular `R` with `AᵀA = RᵀR`, from a Householder QR of `A`.
///
/// Working on the square-root factor keeps errors proportional to the
/// condition number of `A` rather than of `AᵀA`. `A` counts as rank-deficient
/// when `prod_j |R_jj| / ‖a_j‖ ≤ SINGULAR_RTOL`, with `a_j` the columns of `A`.
#[derive(Clone, Copy, Debug)]
pub struct GramFactor {
    r: Matrix,
    log_det: f64,
}

impl GramFactor {
    /// Factors `AᵀA` for `A` given by its rows.
    pub fn from_rows(rows: &[Vector]) -> Result<Self> {
        let n = rows.first().map_or(0, Vector::len);
        let m = rows.len();
        if n == 0 || m < n {
            return Err(Error::NonPositiveDeterminant(0.0));
        }
        let mut a: Vec<[f64; MAX_DIM]> = rows.iter().map(|r| r.data).collect();
        let mut r = Matrix::zeros(n);
        let mut log_det = 0.0;
        let mut log_ratio = 0.0;
        for j in 0..n {
            // reflections preserve full column norms
            let col_norm = a.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
            let alpha = a[j..].iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
            if alpha == 0.0 || !alpha.is_finite() {
                return Err(Error::NonPositiveDeterminant(0.0));
            }
            let r_jj = if a[j][j] > 0.0 { -alpha } else { alpha };
            let mut v: Vec<f64> = a[j..].iter().map(|row| row[j]).collect();
            v[0] -= r_jj;
            let v_sq: f64 = v.iter().map(|x| x * x).sum();
            for k in (j + 1)..n {
                if v_sq > 0.0 {
                    let s: f64 = v.iter().zip(&a[j..]).map(|(vi, row)| vi * row[k]).sum();
                    let f = 2.0 * s / v_sq;
                    for (vi, row) in v.iter().zip(a[j..].iter_mut()) {
                        row[k] -= f * vi;
                    }
                }
                r.data[j][k] = a[j][k];
            }
            r.data[j][j] = r_jj;
            log_det += 2.0 * r_jj.abs().ln();
            log_ratio += r_jj.abs().ln() - col_norm.ln();
        }
        if log_ratio <= SINGULAR_RTOL.ln() {
            return Err(Error::NonPositiveDeterminant(log_det.exp()));
        }
        Ok(Self { r, log_det })
    }

    pub fn dim(&self) -> usize {
        self.r.dim
    }

    /// `log det(AᵀA)`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `y = R⁻ᵀ v` by forward substitution.
    pub fn whiten_vec(&self, v: &Vector) -> Vector {
        let n = self.dim();
        let mut y = Vector::zeros(n);
        for j in 0..n {
            let mut s = v[j];
            for i in 0..j {
                s -= self.r.data[i][j] * y[i];
            }
            y[j] = s / self.r.data[j][j];
        }
        y
    }

    /// `vᵀ (AᵀA)⁻¹ v = ‖R⁻ᵀ v‖²`.
    pub fn inverse_quad_form(&self, v: &Vector) -> f64 {
        let y = self.whiten_vec(v);
        y.dot(&y)
    }

    /// `Bᵀ (AᵀA)⁻¹ B = (R⁻ᵀ B)ᵀ (R⁻ᵀ B)`.
    pub fn sandwich(&self, b: &Matrix) -> Matrix {
        let n = self.dim();
        let mut cols = [Vector::zeros(n); MAX_DIM];
        for (k, col) in cols.iter_mut().enumerate().take(n) {
            let bk = Vector::from_slice(&(0..n).map(|i| b.data[i][k]).collect::<Vec<_>>());
            *col = self.whiten_vec(&bk);
        }
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i][j] = cols[i].dot(&cols[j]);
            }
        }
        out
    }
}

/// `log det(AᵀA)` for `A` given by its rows.
pub fn gram_log_det(rows: &[Vector]) -> Result<f64> {
    Ok(GramFactor::from_rows(rows)?.log_det())
}

fn other_two(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.dim && j < self.dim);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.dim && j < self.dim);
        &mut self.data[i][j]
    }
}
