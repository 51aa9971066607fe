//! Spectra of preconditioned operators: a dense oracle for small sizes and
//! Lanczos extremes for large ones.
//!
//! Both work on the symmetric form `Rᵀ A R` with `R Rᵀ = P⁻¹`, which has the
//! same eigenvalues as `P⁻¹ A`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::preconditioners::{Preconditioner, TauKronPreconditioner};
use crate::sine_transform::HankelCorrection;
use crate::toeplitz_ops::{check_cap, LinearOperator};

pub const LANCZOS_TOL: f64 = 1e-8;
pub const LANCZOS_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub method: SpectrumMethod,
    /// Ritz residual bounds for the two extremes (zero for the dense path).
    pub residual_min: f64,
    pub residual_max: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SpectrumReport {
    pub fn from_eigenvalues(eigs: &[f64]) -> Result<Self> {
        let (lo, hi) = eigs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if eigs.is_empty() {
            return Err(Error::Argument("empty spectrum".into()));
        }
        Ok(Self {
            lambda_min: lo,
            lambda_max: hi,
            method: SpectrumMethod::Dense,
            residual_min: 0.0,
            residual_max: 0.0,
            iterations: eigs.len(),
            converged: true,
        })
    }

    /// `λ_max / λ_min`; only meaningful for positive spectra.
    pub fn condition_number(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let sym = (&m + m.transpose()) * 0.5;
    let mut eigs: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// Dense `Rᵀ A R`, assembled one column at a time.
pub fn dense_symmetrized(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    cap: usize,
) -> Result<DMatrix<f64>> {
    let n = a.dim();
    Error::check_len(n, p.dim())?;
    check_cap(n, cap)?;
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        p.apply_inverse_factor(&e, &mut u)?;
        a.apply(&u, &mut v)?;
        p.apply_inverse_factor_transpose(&v, &mut u)?;
        out.column_mut(j).copy_from_slice(&u);
        e[j] = 0.0;
    }
    Ok(out)
}

/// All eigenvalues of `P⁻¹ A`, ascending.
pub fn dense_preconditioned_spectrum(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    cap: usize,
) -> Result<Vec<f64>> {
    Ok(symmetric_eigenvalues(dense_symmetrized(a, p, cap)?))
}

/// Eigenvalues of `τ(T)⁻¹ H` for the Hankel correction `H = T - τ(T)`.
pub fn hankel_ratio_spectrum(col: &[f64], cap: usize) -> Result<Vec<f64>> {
    let h = HankelCorrection::new(col.to_vec())?;
    let p = TauKronPreconditioner::from_columns(vec![col.to_vec()], vec![1.0])?;
    dense_preconditioned_spectrum(&h, &p, cap)
}

/// Extreme eigenvalues of `P⁻¹ A` by Lanczos with full
/// reorthogonalization. Stops once both extreme Ritz values have residual
/// below `tol · max|θ|`, or after `max_iter` steps with `converged = false`.
pub fn lanczos_extremes(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    max_iter: usize,
    tol: f64,
) -> Result<SpectrumReport> {
    let n = a.dim();
    Error::check_len(n, p.dim())?;
    if !p.is_positive_definite() {
        return Err(Error::Definiteness(
            "Lanczos needs a positive definite preconditioner".into(),
        ));
    }
    if max_iter == 0 {
        return Err(Error::Argument("Lanczos needs at least one step".into()));
    }
    let op = |x: &[f64], y: &mut [f64], scratch: &mut Vec<f64>| -> Result<()> {
        p.apply_inverse_factor(x, y)?;
        a.apply(y, scratch)?;
        p.apply_inverse_factor_transpose(scratch, y)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let qn = norm(&q);
    q.iter_mut().for_each(|v| *v /= qn);

    let steps = max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut report = None;
    for k in 0..steps {
        op(&q, &mut w, &mut scratch)?;
        let alpha = dot(&q, &w);
        basis.push(q.clone());
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let beta = norm(&w);
        if !beta.is_finite() || !alpha.is_finite() {
            return Err(Error::Breakdown(
                "Lanczos produced non-finite values".into(),
            ));
        }

        let (theta, last) = tridiagonal_eigen(&alphas, &betas);
        let scale = theta
            .iter()
            .fold(0.0f64, |m, t| m.max(t.abs()))
            .max(f64::MIN_POSITIVE);
        let lo = 0;
        let hi = theta.len() - 1;
        let res_lo = beta * last[lo].abs();
        let res_hi = beta * last[hi].abs();
        let done = (res_lo < tol * scale && res_hi < tol * scale) || beta <= 1e-14 * scale;
        if done || k + 1 == steps {
            report = Some(SpectrumReport {
                lambda_min: theta[lo],
                lambda_max: theta[hi],
                method: SpectrumMethod::Lanczos,
                residual_min: res_lo,
                residual_max: res_hi,
                iterations: k + 1,
                converged: done || k + 1 == n,
            });
            break;
        }
        betas.push(beta);
        q.iter_mut().zip(&w).for_each(|(qi, wi)| *qi = wi / beta);
    }
    Ok(report.expect("at least one Lanczos step runs"))
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix and the last
/// component of each normalized eigenvector.
fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(k - 1, i)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
