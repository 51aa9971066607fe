//! Grünwald–Letnikov weights and the first column of the 1D Riesz stiffness
//! matrix built from the shifted formula.

use crate::error::{Error, Result};

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "fractional order {alpha} must lie in the open interval (1, 2)"
        )))
    }
}

/// Grünwald–Letnikov coefficients `g_0, ..., g_{L-1}` for one fractional order.
#[derive(Debug, Clone, PartialEq)]
pub struct GlSequence {
    alpha: f64,
    coeffs: Vec<f64>,
}

impl GlSequence {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Evaluates `g_0 = 1`, `g_k = (1 - (alpha + 1) / k) g_{k-1}`.
///
/// Does not check the order; used directly by the analytic-limit tests.
pub(crate) fn gl_recurrence(alpha: f64, len: usize) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(len);
    let mut g = 1.0;
    for k in 0..len {
        if k > 0 {
            g *= 1.0 - (alpha + 1.0) / k as f64;
        }
        coeffs.push(g);
    }
    coeffs
}

pub fn gl_coefficients(alpha: f64, len: usize) -> Result<GlSequence> {
    check_alpha(alpha)?;
    if len == 0 {
        return Err(Error::Argument(
            "coefficient sequence length must be positive".into(),
        ));
    }
    Ok(GlSequence {
        alpha,
        coeffs: gl_recurrence(alpha, len),
    })
}

/// First column `t_0, ..., t_{n-1}` of the symmetric Toeplitz matrix that the
/// shifted Grünwald–Letnikov scheme produces for the Riesz derivative
/// (before the `d c(α) / h^α` scaling).
#[derive(Debug, Clone, PartialEq)]
pub struct RieszColumn {
    alpha: f64,
    t: Vec<f64>,
}

impl RieszColumn {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn entries(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.t
    }
}

/// `t_0 = -2 g_1`, `t_1 = -(g_0 + g_2)`, `t_k = -g_{k+1}` for `k >= 2`.
pub fn riesz_first_column(alpha: f64, n: usize) -> Result<RieszColumn> {
    if n == 0 {
        return Err(Error::Argument("matrix order must be positive".into()));
    }
    let g = gl_coefficients(alpha, n + 1)?;
    let g = g.coeffs();
    let mut t = Vec::with_capacity(n);
    t.push(-2.0 * g[1]);
    if n > 1 {
        t.push(-(g[0] + g[2]));
    }
    t.extend(g.iter().take(n + 1).skip(3).map(|&gk| -gk));
    Ok(RieszColumn { alpha, t })
}
