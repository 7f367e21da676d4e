//! Dense row-major `f64` matrices and the symmetric positive-definite solves
//! behind the closed-form dictionary and classifier updates.
//!
//! Every product accumulates in a fixed order, so results are reproducible
//! bit-for-bit across runs on the same machine.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Builds a matrix from row-major data. Rejects empty shapes, length
    /// mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self::new(n, n, data)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// A single column vector.
    pub fn column(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub(crate) fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for (c, &v) in self.row(r).iter().enumerate() {
                out.data[c * self.rows + r] = v;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    /// `self - other`.
    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    /// `self + other`.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::dims(
                op,
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    fn checked_finite(self, op: &str) -> Result<Matrix> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::Numerical(format!("{op} produced non-finite entries")))
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in 4 * chunks..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `a · b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::dims(
            "matmul",
            format!("{}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            for (o, &bv) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bv;
            }
        }
    }
    out.checked_finite("matmul")
}

/// `a · bᵀ`.
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.cols {
        return Err(Error::dims(
            "matmul_nt",
            format!("{}x{} times transpose of {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let mut out = Matrix::zeros(a.rows, b.rows);
    for i in 0..a.rows {
        let ai = a.row(i);
        for j in 0..b.rows {
            out.data[i * b.rows + j] = dot(ai, b.row(j));
        }
    }
    out.checked_finite("matmul_nt")
}

/// `aᵀ · b`.
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::dims(
            "matmul_tn",
            format!("transpose of {}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let mut out = Matrix::zeros(a.cols, b.cols);
    for k in 0..a.rows {
        let bk = b.row(k);
        for (i, &aki) in a.row(k).iter().enumerate() {
            if aki == 0.0 {
                continue;
            }
            let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &bv) in out_row.iter_mut().zip(bk) {
                *o += aki * bv;
            }
        }
    }
    out.checked_finite("matmul_tn")
}

/// `a · aᵀ`, computed on the upper triangle and mirrored so the result is
/// exactly symmetric.
pub fn gram_rows(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let ai = a.row(i);
        for j in i..n {
            let v = dot(ai, a.row(j));
            out.data[i * n + j] = v;
            out.data[j * n + i] = v;
        }
    }
    out.checked_finite("gram_rows")
}

/// `aᵀ · a`, exactly symmetric.
pub fn gram_cols(a: &Matrix) -> Result<Matrix> {
    let g = matmul_tn(a, a)?;
    let n = g.rows;
    let mut out = g;
    for i in 0..n {
        for j in i + 1..n {
            let v = out.data[i * n + j];
            out.data[j * n + i] = v;
        }
    }
    Ok(out)
}

/// Sum of squared entries.
pub fn frobenius_norm_sq(a: &Matrix) -> f64 {
    a.data.iter().map(|v| v * v).sum()
}

/// Lower-triangular Cholesky factor `S = L Lᵀ` of a symmetric
/// positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factors `s`, reading only its lower triangle.
    pub fn factor(s: &Matrix) -> Result<Self> {
        if s.rows != s.cols {
            return Err(Error::InvalidInput(format!(
                "cholesky needs a square matrix, got {}x{}",
                s.rows, s.cols
            )));
        }
        let n = s.rows;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let row_j = &l[j * n..j * n + j];
            let diag = s.data[j * n + j] - dot(row_j, row_j);
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::Numerical(format!(
                    "matrix is not positive definite: pivot {j} of {n} is {diag:e}"
                )));
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let v = (s.data[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j])) / ljj;
                l[i * n + j] = v;
            }
        }
        Ok(Self { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `S x = b` in place.
    fn solve_vec(&self, x: &mut [f64]) {
        let n = self.n;
        let l = &self.lower;
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            x[i] = (x[i] - dot(row, &x[..i])) / l[i * n + i];
        }
        for i in (0..n).rev() {
            let xi = x[i] / l[i * n + i];
            x[i] = xi;
            let row = &l[i * n..i * n + i];
            for (xk, &lik) in x[..i].iter_mut().zip(row) {
                *xk -= lik * xi;
            }
        }
    }

    /// Returns `M` with `M · S = a`.
    pub fn solve_right(&self, a: &Matrix) -> Result<Matrix> {
        if a.cols != self.n {
            return Err(Error::dims(
                "solve_right",
                format!("right-hand side has {} columns, system is {}x{}", a.cols, self.n, self.n),
            ));
        }
        let mut out = a.clone();
        for r in 0..out.rows {
            self.solve_vec(out.row_mut(r));
        }
        out.checked_finite("solve_right")
    }
}

/// Returns `M` with `M · s = a` for symmetric positive-definite `s`, via a
/// Cholesky factorization.
pub fn solve_spd_right(a: &Matrix, s: &Matrix) -> Result<Matrix> {
    if s.rows != s.cols {
        return Err(Error::InvalidInput(format!(
            "system matrix must be square, got {}x{}",
            s.rows, s.cols
        )));
    }
    let scale = s.max_abs().max(1.0);
    for i in 0..s.rows {
        for j in i + 1..s.cols {
            let d = (s.get(i, j) - s.get(j, i)).abs();
            if d > 1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "system matrix is not symmetric: |s[{i},{j}] - s[{j},{i}]| = {d:e}"
                )));
            }
        }
    }
    Cholesky::factor(s)?.solve_right(a)
}

/// Prepared solver for the ridge problem
/// `min_M (scale/2)‖B − M·Z‖²_F + (lambda/2)‖M‖²_F`
/// with `Z` fixed, whose minimizer is `scale·B·Zᵀ (scale·Z·Zᵀ + lambda·I)⁻¹`.
///
/// When `Z` has fewer columns than rows the equivalent form
/// `scale·B (scale·Zᵀ·Z + lambda·I)⁻¹ Zᵀ` is factored instead, so the
/// factorization is always on the smaller Gram matrix.
#[derive(Debug, Clone)]
pub struct RidgeSolver {
    scale: f64,
    dual: bool,
    z_shape: (usize, usize),
    factor: Cholesky,
}

impl RidgeSolver {
    pub fn new(z: &Matrix, scale: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ridge parameter must be positive, got {lambda}"
            )));
        }
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!(
                "data weight must be nonnegative, got {scale}"
            )));
        }
        let dual = z.cols < z.rows;
        let mut gram = if dual { gram_cols(z)? } else { gram_rows(z)? };
        let n = gram.rows;
        for v in gram.data.iter_mut() {
            *v *= scale;
        }
        for i in 0..n {
            gram.data[i * n + i] += lambda;
        }
        Ok(Self {
            scale,
            dual,
            z_shape: z.shape(),
            factor: Cholesky::factor(&gram)?,
        })
    }

    pub fn uses_dual_form(&self) -> bool {
        self.dual
    }

    /// Minimizer for target `b`; `z` must be the matrix the solver was built on.
    pub fn solve(&self, b: &Matrix, z: &Matrix) -> Result<Matrix> {
        if z.shape() != self.z_shape {
            return Err(Error::dims(
                "ridge solve",
                format!("solver prepared for {:?}, got {:?}", self.z_shape, z.shape()),
            ));
        }
        if b.cols != z.cols {
            return Err(Error::dims(
                "ridge solve",
                format!("target has {} columns, data has {}", b.cols, z.cols),
            ));
        }
        if self.dual {
            let t = self.factor.solve_right(b)?;
            Ok(matmul_nt(&t, z)?.scaled(self.scale))
        } else {
            let rhs = matmul_nt(b, z)?.scaled(self.scale);
            self.factor.solve_right(&rhs)
        }
    }
}

/// One-shot ridge minimizer; see [`RidgeSolver`].
pub fn ridge_right(b: &Matrix, z: &Matrix, scale: f64, lambda: f64) -> Result<Matrix> {
    RidgeSolver::new(z, scale, lambda)?.solve(b, z)
}
