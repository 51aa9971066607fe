//! Preconditioners behind one apply-inverse interface: the Kronecker-sum τ
//! preconditioner, the natural multilevel τ matrix, the Strang circulant and
//! a banded Toeplitz preconditioner.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gl_kernel::riesz_first_column;
use crate::sine_transform::{
    check_nonsingular, hankel_correction_dense, tau_eigen_tensor, tau_eigenvalues,
    MultiSineTransform, TauEigenvalues,
};
use crate::tensor::{total_size, NdFft};
use crate::toeplitz_ops::{
    check_cap, dense_kron_sum, dense_toeplitz, ravel, unravel, DenseMaterialize, KronSumOperator,
    MultilevelToeplitz,
};

/// Bandwidth used for the banded preconditioner when none is given.
pub const DEFAULT_BANDWIDTH: usize = 8;

/// A symmetric preconditioner `P`, applied through its inverse.
///
/// `apply_inverse_factor` applies some `R` with `R Rᵀ = P⁻¹`. The
/// eigenvalues of `Rᵀ A R` are those of `P⁻¹ A`.
pub trait Preconditioner: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &'static str;

    /// `z = P⁻¹ r`.
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()>;

    /// `z = R x`. Fails with a definiteness error when `P` is not positive
    /// definite.
    fn apply_inverse_factor(&self, x: &[f64], z: &mut [f64]) -> Result<()>;

    /// `z = Rᵀ x`.
    fn apply_inverse_factor_transpose(&self, x: &[f64], z: &mut [f64]) -> Result<()>;

    fn is_positive_definite(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityPreconditioner {
    n: usize,
}

impl IdentityPreconditioner {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Preconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &'static str {
        "none"
    }

    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        Error::check_len(self.n, r.len())?;
        Error::check_len(self.n, z.len())?;
        z.copy_from_slice(r);
        Ok(())
    }

    fn apply_inverse_factor(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.apply_inverse(x, z)
    }

    fn apply_inverse_factor_transpose(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.apply_inverse(x, z)
    }
}

/// `S Λ S` with `S = ⊗ S_{n_i}` and a diagonal eigenvalue tensor.
#[derive(Debug, Clone)]
struct SineDiagonal {
    dims: Vec<usize>,
    eigs: Vec<f64>,
    dst: MultiSineTransform,
    positive: bool,
}

impl SineDiagonal {
    fn new(dims: Vec<usize>, eigs: Vec<f64>) -> Result<Self> {
        check_nonsingular(&eigs)?;
        let dst = MultiSineTransform::new(&dims)?;
        let positive = eigs.iter().all(|&v| v > 0.0);
        Ok(Self {
            dims,
            eigs,
            dst,
            positive,
        })
    }

    fn len(&self) -> usize {
        self.eigs.len()
    }

    fn scaled_apply(&self, x: &[f64], z: &mut [f64], f: impl Fn(f64) -> f64) -> Result<()> {
        Error::check_len(self.len(), x.len())?;
        Error::check_len(self.len(), z.len())?;
        z.copy_from_slice(x);
        self.dst.apply(z);
        for (v, &l) in z.iter_mut().zip(&self.eigs) {
            *v *= f(l);
        }
        self.dst.apply(z);
        Ok(())
    }

    fn inverse(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.scaled_apply(x, z, |l| 1.0 / l)
    }

    fn inverse_root(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        if !self.positive {
            return Err(Error::Definiteness(
                "τ preconditioner has non-positive eigenvalues".into(),
            ));
        }
        self.scaled_apply(x, z, |l| 1.0 / l.sqrt())
    }

    fn forward(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.scaled_apply(x, z, |l| l)
    }

    fn dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        check_cap(self.len(), cap)?;
        let mut out = DMatrix::zeros(self.len(), self.len());
        let mut e = vec![0.0; self.len()];
        let mut col = vec![0.0; self.len()];
        for j in 0..self.len() {
            e[j] = 1.0;
            self.forward(&e, &mut col)?;
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        Ok(out)
    }
}

/// `P = Σ_i I ⊗ w_i τ(T_i) ⊗ I`, diagonalized by `⊗ S_{n_i}`.
#[derive(Debug, Clone)]
pub struct TauKronPreconditioner {
    levels: Vec<TauEigenvalues>,
    columns: Vec<Vec<f64>>,
    weights: Vec<f64>,
    inner: SineDiagonal,
}

/// Per-level input to [`build_tau_kron`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauLevel {
    pub alpha: f64,
    pub n: usize,
    pub weight: f64,
}

/// τ preconditioner of a Riesz Kronecker sum from `(α_i, n_i, w_i)`.
pub fn build_tau_kron(levels: &[TauLevel]) -> Result<TauKronPreconditioner> {
    let mut columns = Vec::with_capacity(levels.len());
    let mut weights = Vec::with_capacity(levels.len());
    for level in levels {
        columns.push(riesz_first_column(level.alpha, level.n)?.into_vec());
        weights.push(level.weight);
    }
    TauKronPreconditioner::from_columns(columns, weights)
}

impl TauKronPreconditioner {
    pub fn from_columns(columns: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Argument("at least one level is required".into()));
        }
        Error::check_len(columns.len(), weights.len())?;
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Argument("level weights must be positive".into()));
        }
        let levels = columns
            .iter()
            .zip(&weights)
            .map(|(c, &w)| Ok(tau_eigenvalues(c)?.scaled(w)))
            .collect::<Result<Vec<_>>>()?;
        let dims: Vec<usize> = columns.iter().map(Vec::len).collect();
        let fused = fuse_sum(&dims, levels.iter().map(|l| l.values()));
        if let Some((index, &value)) = fused.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::Definiteness(format!(
                "fused τ eigenvalue {value:e} at index {index} is not positive"
            )));
        }
        let inner = SineDiagonal::new(dims, fused)?;
        Ok(Self {
            levels,
            columns,
            weights,
            inner,
        })
    }

    /// τ preconditioner of the same Kronecker sum.
    pub fn for_operator(op: &KronSumOperator) -> Result<Self> {
        Self::from_columns(
            op.levels().iter().map(|l| l.column().to_vec()).collect(),
            op.weights().to_vec(),
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.inner.dims
    }

    /// Per-level eigenvalues, already multiplied by the level weight.
    pub fn level_eigenvalues(&self) -> &[TauEigenvalues] {
        &self.levels
    }

    pub fn fused_eigenvalues(&self) -> &[f64] {
        &self.inner.eigs
    }

    /// `y = P x`.
    pub fn apply_forward(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.inner.forward(x, y)
    }
}

/// `λ_{j_1..j_m} = Σ_i λ^{(i)}_{j_i}`.
fn fuse_sum<'a>(dims: &[usize], levels: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut fused = vec![0.0; total_size(dims)];
    let mut stride = 1;
    for (axis, eig) in levels.enumerate() {
        let n = dims[axis];
        for (pos, v) in fused.iter_mut().enumerate() {
            *v += eig[(pos / stride) % n];
        }
        stride *= n;
    }
    fused
}

impl Preconditioner for TauKronPreconditioner {
    fn dim(&self) -> usize {
        self.inner.len()
    }

    fn name(&self) -> &'static str {
        "tau"
    }

    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.inner.inverse(r, z)
    }

    fn apply_inverse_factor(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.inner.inverse_root(x, z)
    }

    fn apply_inverse_factor_transpose(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.inner.inverse_root(x, z)
    }
}

impl DenseMaterialize for TauKronPreconditioner {
    /// Assembled from the dense Hankel-corrected level matrices.
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        check_cap(self.inner.len(), cap)?;
        let blocks: Vec<DMatrix<f64>> = self
            .columns
            .iter()
            .zip(&self.weights)
            .map(|(c, &w)| (dense_toeplitz(c) - hankel_correction_dense(c)) * w)
            .collect();
        Ok(dense_kron_sum(&blocks))
    }
}

/// Natural τ matrix of a multilevel Toeplitz matrix. Not necessarily
/// positive definite; check [`Preconditioner::is_positive_definite`].
#[derive(Debug, Clone)]
pub struct MultilevelTauPreconditioner {
    coeffs: Vec<f64>,
    inner: SineDiagonal,
}

pub fn build_multilevel_tau(b: &MultilevelToeplitz) -> Result<MultilevelTauPreconditioner> {
    let dims = b.dims().to_vec();
    let eigs = tau_eigen_tensor(&dims, b.coeffs());
    Ok(MultilevelTauPreconditioner {
        coeffs: b.coeffs().to_vec(),
        inner: SineDiagonal::new(dims, eigs)?,
    })
}

impl MultilevelTauPreconditioner {
    pub fn dims(&self) -> &[usize] {
        &self.inner.dims
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.inner.eigs
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.inner
            .eigs
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn apply_forward(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.inner.forward(x, y)
    }

    /// Dense `S Λ S`.
    pub fn dense_from_eigenvalues(&self, cap: usize) -> Result<DMatrix<f64>> {
        self.inner.dense(cap)
    }
}

impl Preconditioner for MultilevelTauPreconditioner {
    fn dim(&self) -> usize {
        self.inner.len()
    }

    fn name(&self) -> &'static str {
        "tau-natural"
    }

    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.inner.inverse(r, z)
    }

    fn apply_inverse_factor(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.inner.inverse_root(x, z)
    }

    fn apply_inverse_factor_transpose(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.inner.inverse_root(x, z)
    }

    fn is_positive_definite(&self) -> bool {
        self.inner.positive
    }
}

impl DenseMaterialize for MultilevelTauPreconditioner {
    /// Hankel correction applied level by level: the matrix whose entry
    /// `(i, k)` is `Σ` over the per-level choices of Toeplitz part `t` or
    /// Hankel part `-h` of the coefficient tensor.
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let dims = self.inner.dims.clone();
        let size = total_size(&dims);
        check_cap(size, cap)?;
        let m = dims.len();
        // Per level, the lag pairs contributing to entry (a, b): Toeplitz
        // lag |a-b| with sign +1, Hankel lag with sign -1 when nonzero.
        let contributions = |n: usize, a: usize, b: usize| -> Vec<(usize, f64)> {
            let mut out = vec![(a.abs_diff(b), 1.0)];
            let s = a + b + 2;
            if s < n {
                out.push((s, -1.0));
            } else if s > n + 2 {
                out.push((2 * n + 2 - s, -1.0));
            }
            out
        };
        let mut ia = vec![0; m];
        let mut ib = vec![0; m];
        let mut lag = vec![0; m];
        let mut out = DMatrix::zeros(size, size);
        for r in 0..size {
            unravel(r, &dims, &mut ia);
            for c in 0..size {
                unravel(c, &dims, &mut ib);
                let per_level: Vec<Vec<(usize, f64)>> = (0..m)
                    .map(|i| contributions(dims[i], ia[i], ib[i]))
                    .collect();
                let combos: usize = per_level.iter().map(Vec::len).product();
                let mut value = 0.0;
                for mut code in 0..combos {
                    let mut sign = 1.0;
                    for (i, choices) in per_level.iter().enumerate() {
                        let (l, s) = choices[code % choices.len()];
                        code /= choices.len();
                        lag[i] = l;
                        sign *= s;
                    }
                    value += sign * self.coeffs[ravel(&lag, &dims)];
                }
                out[(r, c)] = value;
            }
        }
        Ok(out)
    }
}

/// Strang circulant first column: `c_k = t_k` for `k <= n/2`, else `t_{n-k}`.
pub fn strang_column(col: &[f64]) -> Vec<f64> {
    let n = col.len();
    (0..n)
        .map(|k| if k <= n / 2 { col[k] } else { col[n - k] })
        .collect()
}

/// Multilevel circulant `F* Λ F` with `F` the `m`-dimensional DFT.
#[derive(Debug, Clone)]
pub struct CirculantPreconditioner {
    dims: Vec<usize>,
    coeffs: Vec<f64>,
    eigs: Vec<f64>,
    max_imag: f64,
    fft: NdFft,
    positive: bool,
}

impl CirculantPreconditioner {
    /// One-level Strang circulant of a symmetric Toeplitz column.
    pub fn strang_1d(col: &[f64]) -> Result<Self> {
        Self::from_circulant_tensor(vec![col.len()], strang_column(col))
    }

    /// Kronecker sum of per-level Strang circulants. The eigenvalue tensor
    /// is the sum of the per-level DFT spectra.
    pub fn strang_kron(op: &KronSumOperator) -> Result<Self> {
        let dims = op.dims().to_vec();
        let mut coeffs = vec![0.0; total_size(&dims)];
        let mut level_eigs = Vec::with_capacity(dims.len());
        let mut stride = 1;
        for (level, &w) in op.levels().iter().zip(op.weights()) {
            let c: Vec<f64> = strang_column(level.column())
                .iter()
                .map(|v| v * w)
                .collect();
            for (j, &v) in c.iter().enumerate() {
                coeffs[j * stride] += v;
            }
            let fft = NdFft::new(&[c.len()]);
            let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.forward(&mut buf);
            level_eigs.push(buf.iter().map(|z| z.re).collect::<Vec<_>>());
            stride *= level.order();
        }
        let eigs = fuse_sum(&dims, level_eigs.iter().map(Vec::as_slice));
        Self::finish(dims, coeffs, eigs, 0.0)
    }

    /// `m`-level Strang circulant of a multilevel Toeplitz tensor: the
    /// Strang rule applied along every axis.
    pub fn strang_multilevel(b: &MultilevelToeplitz) -> Result<Self> {
        let dims = b.dims().to_vec();
        let mut coeffs = vec![0.0; b.coeffs().len()];
        let mut idx = vec![0; dims.len()];
        for (pos, c) in coeffs.iter_mut().enumerate() {
            unravel(pos, &dims, &mut idx);
            for (k, &n) in idx.iter_mut().zip(&dims) {
                if *k > n / 2 {
                    *k = n - *k;
                }
            }
            *c = b.coeffs()[ravel(&idx, &dims)];
        }
        Self::from_circulant_tensor(dims, coeffs)
    }

    fn from_circulant_tensor(dims: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Argument("every level needs a positive order".into()));
        }
        let fft = NdFft::new(&dims);
        let mut buf: Vec<Complex64> = coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.forward(&mut buf);
        let max_imag = buf.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        let eigs = buf.iter().map(|z| z.re).collect();
        Self::finish(dims, coeffs, eigs, max_imag)
    }

    fn finish(dims: Vec<usize>, coeffs: Vec<f64>, eigs: Vec<f64>, max_imag: f64) -> Result<Self> {
        check_nonsingular(&eigs)?;
        let positive = eigs.iter().all(|&v| v > 0.0);
        let fft = NdFft::new(&dims);
        Ok(Self {
            dims,
            coeffs,
            eigs,
            max_imag,
            fft,
            positive,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// First column of the circulant (tensor form for several levels).
    pub fn first_column(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigs
    }

    /// Largest imaginary part seen in the DFT of the first column.
    pub fn max_imaginary_part(&self) -> f64 {
        self.max_imag
    }

    fn scaled_apply(&self, x: &[f64], z: &mut [f64], f: impl Fn(f64) -> f64) -> Result<()> {
        Error::check_len(self.eigs.len(), x.len())?;
        Error::check_len(self.eigs.len(), z.len())?;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        for (b, &l) in buf.iter_mut().zip(&self.eigs) {
            *b *= f(l);
        }
        self.fft.inverse(&mut buf);
        for (o, b) in z.iter_mut().zip(&buf) {
            *o = b.re;
        }
        Ok(())
    }
}

impl Preconditioner for CirculantPreconditioner {
    fn dim(&self) -> usize {
        self.eigs.len()
    }

    fn name(&self) -> &'static str {
        "circulant"
    }

    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.scaled_apply(r, z, |l| 1.0 / l)
    }

    fn apply_inverse_factor(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        if !self.positive {
            return Err(Error::Definiteness(
                "circulant preconditioner has non-positive eigenvalues".into(),
            ));
        }
        self.scaled_apply(x, z, |l| 1.0 / l.sqrt())
    }

    fn apply_inverse_factor_transpose(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.apply_inverse_factor(x, z)
    }

    fn is_positive_definite(&self) -> bool {
        self.positive
    }
}

impl DenseMaterialize for CirculantPreconditioner {
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let size = self.eigs.len();
        check_cap(size, cap)?;
        let m = self.dims.len();
        let (mut a, mut b, mut d) = (vec![0; m], vec![0; m], vec![0; m]);
        let mut out = DMatrix::zeros(size, size);
        for r in 0..size {
            unravel(r, &self.dims, &mut a);
            for c in 0..size {
                unravel(c, &self.dims, &mut b);
                for i in 0..m {
                    d[i] = (a[i] + self.dims[i] - b[i]) % self.dims[i];
                }
                out[(r, c)] = self.coeffs[ravel(&d, &self.dims)];
            }
        }
        Ok(out)
    }
}

/// Banded symmetric Toeplitz preconditioner with a diagonal correction,
/// stored as its lower banded Cholesky factor.
///
/// The band keeps lags `0..k`. Row `i` (zero based) then gets
/// `2 Σ_{l=k}^{i} t_l` added to its diagonal: twice the part of the row
/// that the band cuts off on the left of the diagonal.
#[derive(Debug, Clone)]
pub struct BandedPreconditioner {
    n: usize,
    k: usize,
    /// Symmetric band, `band[i][d] = B(i, i - d)` for `d < k`.
    band: Vec<Vec<f64>>,
    /// Cholesky factor in the same layout: `chol[i][d] = L(i, i - d)`.
    chol: Vec<Vec<f64>>,
}

pub fn build_banded(col: &[f64], k: usize) -> Result<BandedPreconditioner> {
    let n = col.len();
    if k == 0 || k > n {
        return Err(Error::Argument(format!(
            "bandwidth {k} must lie in 1..={n}"
        )));
    }
    let mut band = vec![vec![0.0; k]; n];
    let mut tail = 0.0;
    for (i, row) in band.iter_mut().enumerate() {
        if i >= k {
            tail += col[i];
        }
        for (d, v) in row.iter_mut().enumerate() {
            if d <= i {
                *v = col[d];
            }
        }
        row[0] += 2.0 * tail;
    }
    let chol = banded_cholesky(&band, k)?;
    Ok(BandedPreconditioner { n, k, band, chol })
}

fn banded_cholesky(band: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
    let n = band.len();
    let mut l = vec![vec![0.0; k]; n];
    for i in 0..n {
        let lo = i.saturating_sub(k - 1);
        for j in lo..=i {
            // L(i, j) = (B(i, j) - Σ_{p<j} L(i,p) L(j,p)) / L(j, j)
            let mut s = band[i][i - j];
            let plo = lo.max(j.saturating_sub(k - 1));
            for p in plo..j {
                s -= l[i][i - p] * l[j][j - p];
            }
            if j == i {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::Definiteness(format!(
                        "banded factorization failed at row {i} (pivot {s:e})"
                    )));
                }
                l[i][0] = s.sqrt();
            } else {
                l[i][i - j] = s / l[j][0];
            }
        }
    }
    Ok(l)
}

impl BandedPreconditioner {
    pub fn bandwidth(&self) -> usize {
        self.k
    }

    fn forward_solve(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.k - 1);
            let mut s = x[i];
            for p in lo..i {
                s -= self.chol[i][i - p] * x[p];
            }
            x[i] = s / self.chol[i][0];
        }
    }

    fn backward_solve(&self, x: &mut [f64]) {
        for i in (0..self.n).rev() {
            let hi = (i + self.k).min(self.n);
            let mut s = x[i];
            for p in i + 1..hi {
                s -= self.chol[p][p - i] * x[p];
            }
            x[i] = s / self.chol[i][0];
        }
    }

    fn check(&self, x: &[f64], z: &[f64]) -> Result<()> {
        Error::check_len(self.n, x.len())?;
        Error::check_len(self.n, z.len())
    }
}

impl Preconditioner for BandedPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &'static str {
        "banded"
    }

    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.check(r, z)?;
        z.copy_from_slice(r);
        self.forward_solve(z);
        self.backward_solve(z);
        Ok(())
    }

    /// `R = L⁻ᵀ`.
    fn apply_inverse_factor(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.check(x, z)?;
        z.copy_from_slice(x);
        self.backward_solve(z);
        Ok(())
    }

    fn apply_inverse_factor_transpose(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        self.check(x, z)?;
        z.copy_from_slice(x);
        self.forward_solve(z);
        Ok(())
    }
}

impl DenseMaterialize for BandedPreconditioner {
    fn materialize_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        check_cap(self.n, cap)?;
        let mut out = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.band.iter().enumerate() {
            for (d, &v) in row.iter().enumerate().take(i + 1) {
                out[(i, i - d)] = v;
                out[(i - d, i)] = v;
            }
        }
        Ok(out)
    }
}

/// Preconditioner families selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreconditionerKind {
    None,
    Tau,
    Circulant,
    Banded,
    TauNatural,
}

impl PreconditionerKind {
    pub const ALL: [PreconditionerKind; 5] = [
        PreconditionerKind::Tau,
        PreconditionerKind::Circulant,
        PreconditionerKind::Banded,
        PreconditionerKind::None,
        PreconditionerKind::TauNatural,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PreconditionerKind::None => "none",
            PreconditionerKind::Tau => "tau",
            PreconditionerKind::Circulant => "circulant",
            PreconditionerKind::Banded => "banded",
            PreconditionerKind::TauNatural => "tau-natural",
        }
    }
}

impl std::str::FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown preconditioner {s:?}")))
    }
}

/// Builds the requested preconditioner for a Kronecker-sum operator. The
/// banded preconditioner exists only for one level.
pub fn for_kron_sum(
    op: &KronSumOperator,
    kind: PreconditionerKind,
) -> Result<Box<dyn Preconditioner>> {
    Ok(match kind {
        PreconditionerKind::None => Box::new(IdentityPreconditioner::new(total_size(op.dims()))),
        PreconditionerKind::Tau => Box::new(TauKronPreconditioner::for_operator(op)?),
        PreconditionerKind::Circulant => Box::new(CirculantPreconditioner::strang_kron(op)?),
        PreconditionerKind::Banded => {
            if op.levels().len() != 1 {
                return Err(Error::Argument(
                    "the banded preconditioner needs a one-level operator".into(),
                ));
            }
            let col: Vec<f64> = op.levels()[0]
                .column()
                .iter()
                .map(|t| t * op.weights()[0])
                .collect();
            Box::new(build_banded(&col, DEFAULT_BANDWIDTH.min(col.len()))?)
        }
        PreconditionerKind::TauNatural => Box::new(build_multilevel_tau(
            &MultilevelToeplitz::from_kron_sum(op)?,
        )?),
    })
}
