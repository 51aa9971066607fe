//! Orthonormal DST-I and the τ algebra it diagonalizes.
//!
//! `[S_n]_{jk} = sqrt(2/(n+1)) sin(πjk/(n+1))`, `1 <= j, k <= n`. `S_n` is
//! symmetric and orthogonal, so it is its own inverse. Every τ matrix is
//! `S_n Λ S_n`; the natural τ matrix of a symmetric Toeplitz `T_n` is
//! `T_n - H_n` with the Hankel correction `H_n`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{for_each_pencil, NdFft};
use crate::toeplitz_ops::{check_cap, dense_toeplitz, LinearOperator, SymToeplitz1D};

/// Orthonormal DST-I of order `n`, computed through a complex FFT of
/// length `2(n+1)` applied to the odd extension.
#[derive(Clone)]
pub struct SineTransformPlan {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SineTransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransformPlan")
            .field("n", &self.n)
            .finish()
    }
}

impl SineTransformPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument(
                "sine transform order must be positive".into(),
            ));
        }
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Ok(Self { n, fft })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// `y = S_n x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        Error::check_len(self.n, x.len())?;
        Error::check_len(self.n, y.len())?;
        let mut buf = vec![Complex64::default(); 2 * (self.n + 1)];
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        self.transform(x, y, &mut buf, &mut scratch);
        Ok(())
    }

    pub fn apply_in_place(&self, x: &mut [f64]) -> Result<()> {
        let input = x.to_vec();
        self.apply(&input, x)
    }

    fn transform(
        &self,
        x: &[f64],
        y: &mut [f64],
        buf: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        let n = self.n;
        let m = 2 * (n + 1);
        buf.fill(Complex64::default());
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1].re = v;
            buf[m - 1 - j].re = -v;
        }
        self.fft.process_with_scratch(buf, scratch);
        // FFT of the odd extension is -2i Σ x_j sin(πjk/(n+1)).
        let scale = -0.5 * (2.0 / (n + 1) as f64).sqrt();
        for (k, out) in y.iter_mut().enumerate() {
            *out = scale * buf[k + 1].im;
        }
    }

    /// Applies `S_n` to every pencil along `axis` of a first-index-fastest
    /// tensor.
    pub(crate) fn apply_along_axis(&self, data: &mut [f64], dims: &[usize], axis: usize) {
        debug_assert_eq!(dims[axis], self.n);
        let mut buf = vec![Complex64::default(); 2 * (self.n + 1)];
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        let mut pencil = Vec::new();
        let mut out = vec![0.0; self.n];
        for_each_pencil(data, dims, axis, &mut pencil, |p| {
            self.transform(p, &mut out, &mut buf, &mut scratch);
            p.copy_from_slice(&out);
        });
    }
}

/// Dense `S_n`.
pub fn dense_sine_matrix(n: usize) -> DMatrix<f64> {
    let scale = (2.0 / (n + 1) as f64).sqrt();
    let h = std::f64::consts::PI / (n + 1) as f64;
    DMatrix::from_fn(n, n, |j, k| scale * (h * ((j + 1) * (k + 1)) as f64).sin())
}

/// `⊗_i S_{n_i}` applied in place to a first-index-fastest tensor.
#[derive(Debug, Clone)]
pub(crate) struct MultiSineTransform {
    dims: Vec<usize>,
    plans: Vec<SineTransformPlan>,
}

impl MultiSineTransform {
    pub(crate) fn new(dims: &[usize]) -> Result<Self> {
        let plans = dims
            .iter()
            .map(|&n| SineTransformPlan::new(n))
            .collect::<Result<_>>()?;
        Ok(Self {
            dims: dims.to_vec(),
            plans,
        })
    }

    pub(crate) fn apply(&self, data: &mut [f64]) {
        for (axis, plan) in self.plans.iter().enumerate() {
            plan.apply_along_axis(data, &self.dims, axis);
        }
    }
}

/// Eigenvalues `σ_1..σ_n` of a τ matrix, ordered by eigenvector index (the
/// `j`-th column of `S_n` carries `σ_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct TauEigenvalues {
    sigma: Vec<f64>,
}

impl TauEigenvalues {
    pub fn from_values(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::Argument("empty eigenvalue array".into()));
        }
        Ok(Self { sigma })
    }

    pub fn values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn order(&self) -> usize {
        self.sigma.len()
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self {
            sigma: self.sigma.iter().map(|s| s * w).collect(),
        }
    }
}

/// Even extension of a coefficient tensor onto the `2(n_i+1)` grid. Its
/// FFT is real and equals `Σ_k Π μ(k_i) cos(π j_i k_i/(n_i+1)) t_k` with
/// `μ(0) = 1`, `μ(k > 0) = 2`.
pub(crate) fn tau_eigen_tensor(dims: &[usize], coeffs: &[f64]) -> Vec<f64> {
    let edims: Vec<usize> = dims.iter().map(|&n| 2 * (n + 1)).collect();
    let fft = NdFft::new(&edims);
    let mut buf = vec![Complex64::default(); fft.len()];
    let m = dims.len();
    let mut k = vec![0; m];
    let mut s = vec![0; m];
    for (pos, &t) in coeffs.iter().enumerate() {
        crate::toeplitz_ops::unravel(pos, dims, &mut k);
        // Every sign pattern of the nonzero components.
        let nonzero: Vec<usize> = (0..m).filter(|&i| k[i] > 0).collect();
        for mask in 0..(1usize << nonzero.len()) {
            s.copy_from_slice(&k);
            for (bit, &axis) in nonzero.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    s[axis] = edims[axis] - k[axis];
                }
            }
            buf[crate::toeplitz_ops::ravel(&s, &edims)].re += t;
        }
    }
    fft.forward(&mut buf);
    let mut out = vec![0.0; coeffs.len()];
    let mut j = vec![0; m];
    for (pos, o) in out.iter_mut().enumerate() {
        crate::toeplitz_ops::unravel(pos, dims, &mut j);
        for ji in j.iter_mut() {
            *ji += 1;
        }
        *o = buf[crate::toeplitz_ops::ravel(&j, &edims)].re;
    }
    out
}

/// `σ_j = t_0 + 2 Σ_{k=1}^{n-1} t_k cos(jπk/(n+1))`, all `j` in `O(n log n)`.
pub fn tau_eigenvalues(col: &[f64]) -> Result<TauEigenvalues> {
    if col.is_empty() {
        return Err(Error::Argument("empty Toeplitz column".into()));
    }
    Ok(TauEigenvalues {
        sigma: tau_eigen_tensor(&[col.len()], col),
    })
}

/// Dense Hankel correction `H_n` with `τ(T_n) = T_n - H_n`.
pub fn hankel_correction_dense(col: &[f64]) -> DMatrix<f64> {
    let n = col.len();
    // 1-based (i, j): t_{i+j} if i+j < n, zero for i+j in {n, n+1, n+2},
    // t_{2n+2-(i+j)} otherwise.
    DMatrix::from_fn(n, n, |i, j| {
        let s = i + j + 2;
        if s < n {
            col[s]
        } else if s <= n + 2 {
            0.0
        } else {
            col[2 * n + 2 - s]
        }
    })
}

/// Dense natural τ matrix `T_n - H_n`.
pub fn tau_dense(col: &[f64], cap: usize) -> Result<DMatrix<f64>> {
    if col.is_empty() {
        return Err(Error::Argument("empty Toeplitz column".into()));
    }
    check_cap(col.len(), cap)?;
    Ok(dense_toeplitz(col) - hankel_correction_dense(col))
}

/// Zero-eigenvalue threshold, relative to the largest `|σ|`.
pub const SINGULAR_RELATIVE_TOL: f64 = 1e-14;

pub(crate) fn check_nonsingular(values: &[f64]) -> Result<()> {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value.abs() <= SINGULAR_RELATIVE_TOL * max {
            return Err(Error::SingularPreconditioner { index, value });
        }
    }
    Ok(())
}

/// `τ(T_n)^{-1} b = S Λ^{-1} S b`.
pub fn tau_solve_1d(
    eigs: &TauEigenvalues,
    plan: &SineTransformPlan,
    b: &[f64],
) -> Result<Vec<f64>> {
    Error::check_len(plan.order(), eigs.order())?;
    check_nonsingular(eigs.values())?;
    let mut y = vec![0.0; plan.order()];
    plan.apply(b, &mut y)?;
    for (v, s) in y.iter_mut().zip(eigs.values()) {
        *v /= s;
    }
    plan.apply_in_place(&mut y)?;
    Ok(y)
}

/// The Hankel correction `H_n = T_n - τ(T_n)` as a matrix-free operator.
#[derive(Debug, Clone)]
pub struct HankelCorrection {
    toeplitz: SymToeplitz1D,
    eigs: TauEigenvalues,
    plan: SineTransformPlan,
}

impl HankelCorrection {
    pub fn new(col: Vec<f64>) -> Result<Self> {
        let eigs = tau_eigenvalues(&col)?;
        let plan = SineTransformPlan::new(col.len())?;
        Ok(Self {
            toeplitz: SymToeplitz1D::new(col)?,
            eigs,
            plan,
        })
    }
}

impl LinearOperator for HankelCorrection {
    fn dim(&self) -> usize {
        self.plan.order()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.toeplitz.matvec(x, y)?;
        let mut s = vec![0.0; x.len()];
        self.plan.apply(x, &mut s)?;
        for (v, e) in s.iter_mut().zip(self.eigs.values()) {
            *v *= e;
        }
        self.plan.apply_in_place(&mut s)?;
        for (o, t) in y.iter_mut().zip(&s) {
            *o -= t;
        }
        Ok(())
    }
}
