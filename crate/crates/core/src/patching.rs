//! Patch extraction (convolution as matrix product) and the three matrix
//! views of the code tensor.
//!
//! Conventions, all zero-based:
//! - patches are taken without padding; the patch grid is scanned row by row
//!   with the column index varying fastest, and each patch is vectorized
//!   row-major;
//! - the patch matrix stacks samples side by side, `p` columns per sample;
//! - the code tensor `U[k, j, i]` is indexed by patch `k`, sample `j` and atom
//!   `i`, and is exposed as
//!   `bar[i, j·p + k]` (`m × np`), `hat[k, j·m + i]` (`p × mn`) and
//!   `tilde[i·p + k, j]` (`mp × n`).

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Shape of the input samples and the sliding atom window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConvGeometry {
    pub input_rows: usize,
    pub input_cols: usize,
    pub atom_rows: usize,
    pub atom_cols: usize,
    pub stride_rows: usize,
    pub stride_cols: usize,
}

impl ConvGeometry {
    pub fn new(
        input_rows: usize,
        input_cols: usize,
        atom_rows: usize,
        atom_cols: usize,
        stride_rows: usize,
        stride_cols: usize,
    ) -> Result<Self> {
        let g = Self {
            input_rows,
            input_cols,
            atom_rows,
            atom_cols,
            stride_rows,
            stride_cols,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square atoms with the same stride in both directions.
    pub fn image(rows: usize, cols: usize, atom: usize, stride: usize) -> Result<Self> {
        Self::new(rows, cols, atom, atom, stride, stride)
    }

    /// 1-D mode: `len × 1` samples, `atom_len × 1` atoms.
    pub fn vector(len: usize, atom_len: usize, stride: usize) -> Result<Self> {
        Self::new(len, 1, atom_len, 1, stride, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.input_rows,
            self.input_cols,
            self.atom_rows,
            self.atom_cols,
        ];
        if dims.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "geometry dimensions must be positive: {self:?}"
            )));
        }
        if self.stride_rows == 0 || self.stride_cols == 0 {
            return Err(Error::InvalidInput("strides must be at least 1".into()));
        }
        if self.atom_rows > self.input_rows || self.atom_cols > self.input_cols {
            return Err(Error::InvalidInput(format!(
                "atom {}x{} does not fit in input {}x{}",
                self.atom_rows, self.atom_cols, self.input_rows, self.input_cols
            )));
        }
        Ok(())
    }

    pub fn grid_rows(&self) -> usize {
        (self.input_rows - self.atom_rows) / self.stride_rows + 1
    }

    pub fn grid_cols(&self) -> usize {
        (self.input_cols - self.atom_cols) / self.stride_cols + 1
    }

    /// Number of patches `p` per sample.
    pub fn patch_count(&self) -> usize {
        self.grid_rows() * self.grid_cols()
    }

    /// Length of a vectorized atom (`s²`, or `s` in 1-D mode).
    pub fn atom_len(&self) -> usize {
        self.atom_rows * self.atom_cols
    }

    fn check_sample(&self, sample: &Matrix) -> Result<()> {
        if sample.shape() != (self.input_rows, self.input_cols) {
            return Err(Error::dims(
                "extract_patches",
                format!(
                    "sample is {}x{}, geometry expects {}x{}",
                    sample.rows(),
                    sample.cols(),
                    self.input_rows,
                    self.input_cols
                ),
            ));
        }
        Ok(())
    }

    /// Writes the patches of `sample` into columns `col0..col0 + p` of `out`.
    fn write_patches(&self, sample: &Matrix, out: &mut Matrix, col0: usize) {
        let gc = self.grid_cols();
        for gr in 0..self.grid_rows() {
            for gcol in 0..gc {
                let col = col0 + gr * gc + gcol;
                let r0 = gr * self.stride_rows;
                let c0 = gcol * self.stride_cols;
                for ar in 0..self.atom_rows {
                    let src = &sample.row(r0 + ar)[c0..c0 + self.atom_cols];
                    for (ac, &v) in src.iter().enumerate() {
                        out.set(ar * self.atom_cols + ac, col, v);
                    }
                }
            }
        }
    }
}

/// `atom_len × p` matrix whose column `k` is the `k`-th vectorized patch.
pub fn extract_patches(sample: &Matrix, geom: &ConvGeometry) -> Result<Matrix> {
    geom.check_sample(sample)?;
    let mut out = Matrix::zeros(geom.atom_len(), geom.patch_count());
    geom.write_patches(sample, &mut out, 0);
    Ok(out)
}

/// `atom_len × np` patch matrix, sample-major and patch-minor.
pub fn build_patch_matrix(samples: &[Matrix], geom: &ConvGeometry) -> Result<Matrix> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples to patch".into()));
    }
    let p = geom.patch_count();
    let mut out = Matrix::zeros(geom.atom_len(), p * samples.len());
    for (j, s) in samples.iter().enumerate() {
        geom.check_sample(s).map_err(|e| match e {
            Error::DimensionMismatch { detail, .. } => Error::InvalidInput(format!("sample {j}: {detail}")),
            other => other,
        })?;
        geom.write_patches(s, &mut out, j * p);
    }
    Ok(out)
}

/// Per-patch, per-sample, per-atom codes `U[k, j, i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeTensor {
    p: usize,
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl CodeTensor {
    pub fn zeros(p: usize, n: usize, m: usize) -> Result<Self> {
        Self::new(p, n, m, vec![0.0; p * n * m])
    }

    /// `values` is laid out with the atom index fastest, then sample, then
    /// patch.
    pub fn new(p: usize, n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if p == 0 || n == 0 || m == 0 {
            return Err(Error::InvalidInput(format!(
                "code tensor dimensions must be positive, got p={p} n={n} m={m}"
            )));
        }
        if values.len() != p * n * m {
            return Err(Error::InvalidInput(format!(
                "code tensor needs {} values, got {}",
                p * n * m,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("code tensor has non-finite values".into()));
        }
        Ok(Self { p, n, m, values })
    }

    pub fn from_fn(p: usize, n: usize, m: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(p * n * m);
        for k in 0..p {
            for j in 0..n {
                for i in 0..m {
                    values.push(f(k, j, i));
                }
            }
        }
        Self::new(p, n, m, values)
    }

    #[inline]
    fn idx(&self, k: usize, j: usize, i: usize) -> usize {
        (k * self.n + j) * self.m + i
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize, i: usize) -> f64 {
        self.values[self.idx(k, j, i)]
    }

    pub fn patches(&self) -> usize {
        self.p
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `m × np` view: `bar[i, j·p + k] = U[k, j, i]`.
    pub fn view_bar(&self) -> Matrix {
        let (p, n) = (self.p, self.n);
        Matrix::from_fn(self.m, n * p, |i, col| self.get(col % p, col / p, i))
    }

    /// `p × mn` view: `hat[k, j·m + i] = U[k, j, i]`.
    pub fn view_hat(&self) -> Matrix {
        let m = self.m;
        Matrix::from_fn(self.p, self.n * m, |k, col| self.get(k, col / m, col % m))
    }

    /// `mp × n` view: `tilde[i·p + k, j] = U[k, j, i]`.
    pub fn view_tilde(&self) -> Matrix {
        let p = self.p;
        Matrix::from_fn(self.m * p, self.n, |row, j| self.get(row % p, j, row / p))
    }

    pub fn from_bar(mat: &Matrix, p: usize, n: usize, m: usize) -> Result<Self> {
        expect_shape("from_bar", mat, (m, n * p))?;
        Self::from_fn(p, n, m, |k, j, i| mat.get(i, j * p + k))
    }

    pub fn from_hat(mat: &Matrix, p: usize, n: usize, m: usize) -> Result<Self> {
        expect_shape("from_hat", mat, (p, m * n))?;
        Self::from_fn(p, n, m, |k, j, i| mat.get(k, j * m + i))
    }

    pub fn from_tilde(mat: &Matrix, p: usize, n: usize, m: usize) -> Result<Self> {
        expect_shape("from_tilde", mat, (m * p, n))?;
        Self::from_fn(p, n, m, |k, j, i| mat.get(i * p + k, j))
    }
}

fn expect_shape(op: &'static str, mat: &Matrix, want: (usize, usize)) -> Result<()> {
    if mat.shape() != want {
        return Err(Error::dims(
            op,
            format!("expected {:?}, got {:?}", want, mat.shape()),
        ));
    }
    Ok(())
}

/// Matrix-level reshapes used between the code update steps.
pub mod reshape {
    use super::CodeTensor;
    use crate::error::Result;
    use crate::linalg::Matrix;

    /// `bar → tilde`.
    pub fn bar_to_tilde(bar: &Matrix, p: usize, n: usize, m: usize) -> Result<Matrix> {
        Ok(CodeTensor::from_bar(bar, p, n, m)?.view_tilde())
    }

    /// `tilde → hat`.
    pub fn tilde_to_hat(tilde: &Matrix, p: usize, n: usize, m: usize) -> Result<Matrix> {
        Ok(CodeTensor::from_tilde(tilde, p, n, m)?.view_hat())
    }

    /// `hat → tilde`.
    pub fn hat_to_tilde(hat: &Matrix, p: usize, n: usize, m: usize) -> Result<Matrix> {
        Ok(CodeTensor::from_hat(hat, p, n, m)?.view_tilde())
    }

    /// `tilde → bar`.
    pub fn tilde_to_bar(tilde: &Matrix, p: usize, n: usize, m: usize) -> Result<Matrix> {
        Ok(CodeTensor::from_tilde(tilde, p, n, m)?.view_bar())
    }
}
