//! Matrix-free symmetric Toeplitz, Kronecker-sum and multi-level Toeplitz
//! operators.
//!
//! Every operator applies in `O(N log N)` through a circulant embedding of
//! twice the size per level, and can be materialized densely (entry by
//! entry, without touching the FFT path) for small-size oracles.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{accumulate_pencils, total_size, NdFft};

/// Default cap on `N` for dense materialization.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// A real symmetric linear operator of fixed size.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y)?;
        Ok(y)
    }
}

/// Exact dense assembly, used as a test oracle.
pub trait DenseMaterialize {
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>>;
}

pub(crate) fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::Resource { size, cap })
    } else {
        Ok(())
    }
}

/// Dense symmetric Toeplitz matrix from its first column.
pub fn dense_toeplitz(col: &[f64]) -> DMatrix<f64> {
    let n = col.len();
    DMatrix::from_fn(n, n, |i, j| col[i.abs_diff(j)])
}

/// Symmetric Toeplitz matrix stored as its first column plus the spectrum of
/// the `2n` circulant that embeds it.
#[derive(Clone)]
pub struct SymToeplitz1D {
    col: Vec<f64>,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SymToeplitz1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymToeplitz1D")
            .field("col", &self.col)
            .finish()
    }
}

impl SymToeplitz1D {
    pub fn new(col: Vec<f64>) -> Result<Self> {
        let n = col.len();
        if n == 0 {
            return Err(Error::Argument("Toeplitz order must be positive".into()));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(
                "Toeplitz column has non-finite entries".into(),
            ));
        }
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        // [t_0, ..., t_{n-1}, 0, t_{n-1}, ..., t_1]
        let mut spectrum = vec![Complex64::default(); m];
        for (k, &t) in col.iter().enumerate() {
            spectrum[k].re = t;
            if k > 0 {
                spectrum[m - k].re = t;
            }
        }
        forward.process(&mut spectrum);
        Ok(Self {
            col,
            spectrum,
            forward,
            inverse,
        })
    }

    pub fn order(&self) -> usize {
        self.col.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.col
    }

    /// `y = T x` via length-`2n` cyclic convolution.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.order();
        Error::check_len(n, x.len())?;
        Error::check_len(n, y.len())?;
        let m = 2 * n;
        let mut buf = vec![Complex64::default(); m];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / m as f64;
        for (out, b) in y.iter_mut().zip(&buf) {
            *out = b.re * scale;
        }
        Ok(())
    }
}

impl LinearOperator for SymToeplitz1D {
    fn dim(&self) -> usize {
        self.order()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matvec(x, y)
    }
}

impl DenseMaterialize for SymToeplitz1D {
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        check_cap(self.order(), cap)?;
        Ok(dense_toeplitz(&self.col))
    }
}

/// `A = Σ_i I ⊗ (w_i A_i) ⊗ I`, where level `i` acts on the `i`-th index of
/// a first-index-fastest vector.
#[derive(Debug, Clone)]
pub struct KronSumOperator {
    levels: Vec<SymToeplitz1D>,
    weights: Vec<f64>,
    dims: Vec<usize>,
}

impl KronSumOperator {
    pub fn new(levels: Vec<SymToeplitz1D>, weights: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Argument(
                "Kronecker sum needs at least one level".into(),
            ));
        }
        Error::check_len(levels.len(), weights.len())?;
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Argument("level weights must be positive".into()));
        }
        let dims = levels.iter().map(|l| l.order()).collect();
        Ok(Self {
            levels,
            weights,
            dims,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn levels(&self) -> &[SymToeplitz1D] {
        &self.levels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let size = total_size(&self.dims);
        Error::check_len(size, x.len())?;
        Error::check_len(size, y.len())?;
        y.fill(0.0);
        for (axis, (level, &w)) in self.levels.iter().zip(&self.weights).enumerate() {
            accumulate_pencils(x, y, &self.dims, axis, |pencil, out| {
                level
                    .matvec(pencil, out)
                    .expect("pencil length matches level order");
                for v in out.iter_mut() {
                    *v *= w;
                }
            });
        }
        Ok(())
    }
}

impl LinearOperator for KronSumOperator {
    fn dim(&self) -> usize {
        total_size(&self.dims)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matvec(x, y)
    }
}

/// Dense `Σ_i I ⊗ M_i ⊗ I` with `M_i` acting on index `i` (first fastest).
pub(crate) fn dense_kron_sum(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut result: Option<DMatrix<f64>> = None;
    let dims: Vec<usize> = blocks.iter().map(|b| b.nrows()).collect();
    for (axis, block) in blocks.iter().enumerate() {
        let inner: usize = dims[..axis].iter().product();
        let outer: usize = dims[axis + 1..].iter().product();
        let term = DMatrix::<f64>::identity(outer, outer)
            .kronecker(block)
            .kronecker(&DMatrix::<f64>::identity(inner, inner));
        result = Some(match result {
            None => term,
            Some(acc) => acc + term,
        });
    }
    result.expect("at least one block")
}

impl DenseMaterialize for KronSumOperator {
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        check_cap(self.dim(), cap)?;
        let blocks: Vec<DMatrix<f64>> = self
            .levels
            .iter()
            .zip(&self.weights)
            .map(|(l, &w)| dense_toeplitz(l.column()) * w)
            .collect();
        Ok(dense_kron_sum(&blocks))
    }
}

/// General symmetric `m`-level Toeplitz matrix given by its coefficient
/// tensor `t_{j_1..j_m}` (`0 <= j_i < n_i`, first index fastest). Entry
/// `(i, k)` of the matrix is `t_{|i_1-k_1|, ..., |i_m-k_m|}`.
#[derive(Debug, Clone)]
pub struct MultilevelToeplitz {
    dims: Vec<usize>,
    coeffs: Vec<f64>,
    spectrum: Vec<Complex64>,
    fft: NdFft,
}

/// Index in the symmetric `2n` embedding: `s -> |s|` folded, with the
/// middle slot `n` left empty.
fn embed_index(s: usize, n: usize) -> Option<usize> {
    match s.cmp(&n) {
        std::cmp::Ordering::Less => Some(s),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(2 * n - s),
    }
}

pub(crate) fn unravel(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for (o, &d) in out.iter_mut().zip(dims) {
        *o = idx % d;
        idx /= d;
    }
}

pub(crate) fn ravel(index: &[usize], dims: &[usize]) -> usize {
    index
        .iter()
        .zip(dims)
        .rev()
        .fold(0, |acc, (&i, &d)| acc * d + i)
}

impl MultilevelToeplitz {
    pub fn new(dims: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Argument("every level needs a positive order".into()));
        }
        Error::check_len(total_size(&dims), coeffs.len())?;
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(
                "coefficient tensor has non-finite entries".into(),
            ));
        }
        let edims: Vec<usize> = dims.iter().map(|&n| 2 * n).collect();
        let fft = NdFft::new(&edims);
        let mut spectrum = vec![Complex64::default(); fft.len()];
        let mut s = vec![0; dims.len()];
        let mut j = vec![0; dims.len()];
        for (pos, slot) in spectrum.iter_mut().enumerate() {
            unravel(pos, &edims, &mut s);
            let mut inside = true;
            for ((ji, &si), &n) in j.iter_mut().zip(&s).zip(&dims) {
                match embed_index(si, n) {
                    Some(v) => *ji = v,
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if inside {
                slot.re = coeffs[ravel(&j, &dims)];
            }
        }
        fft.forward(&mut spectrum);
        Ok(Self {
            dims,
            coeffs,
            spectrum,
            fft,
        })
    }

    /// Separable tensor of a Kronecker sum: `w_i t^{(i)}` along each axis.
    pub fn from_kron_sum(op: &KronSumOperator) -> Result<Self> {
        let dims = op.dims().to_vec();
        let mut coeffs = vec![0.0; total_size(&dims)];
        let mut stride = 1;
        for (level, &w) in op.levels().iter().zip(op.weights()) {
            for (j, &t) in level.column().iter().enumerate() {
                coeffs[j * stride] += w * t;
            }
            stride *= level.order();
        }
        Self::new(dims, coeffs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let size = total_size(&self.dims);
        Error::check_len(size, x.len())?;
        Error::check_len(size, y.len())?;
        let edims = self.fft.dims();
        let mut buf = vec![Complex64::default(); self.fft.len()];
        let mut idx = vec![0; self.dims.len()];
        for (pos, &v) in x.iter().enumerate() {
            unravel(pos, &self.dims, &mut idx);
            buf[ravel(&idx, edims)].re = v;
        }
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.fft.inverse(&mut buf);
        for (pos, out) in y.iter_mut().enumerate() {
            unravel(pos, &self.dims, &mut idx);
            *out = buf[ravel(&idx, edims)].re;
        }
        Ok(())
    }
}

impl LinearOperator for MultilevelToeplitz {
    fn dim(&self) -> usize {
        total_size(&self.dims)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matvec(x, y)
    }
}

impl DenseMaterialize for MultilevelToeplitz {
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let size = self.dim();
        check_cap(size, cap)?;
        let m = self.dims.len();
        let mut a = vec![0; m];
        let mut b = vec![0; m];
        let mut d = vec![0; m];
        let mut out = DMatrix::zeros(size, size);
        for r in 0..size {
            unravel(r, &self.dims, &mut a);
            for c in 0..size {
                unravel(c, &self.dims, &mut b);
                for ((di, ai), bi) in d.iter_mut().zip(&a).zip(&b) {
                    *di = ai.abs_diff(*bi);
                }
                out[(r, c)] = self.coeffs[ravel(&d, &self.dims)];
            }
        }
        Ok(out)
    }
}
