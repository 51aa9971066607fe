//! Generating functions (symbols) of the Toeplitz matrices in play and
//! their Fourier coefficients.
//!
//! Coefficients of an even symbol `f` are `t_j = (1/2π) ∫ f(θ) cos(jθ) dθ`.
//! They are computed with the periodic trapezoidal rule evaluated by one FFT
//! per refinement level, doubling the sample count until two successive
//! coefficient sets agree.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::gl_kernel::check_alpha;

/// Largest trapezoid sample count tried before giving up.
pub const MAX_QUADRATURE_SAMPLES: usize = 1 << 22;

fn check_angle(theta: f64) -> Result<()> {
    if theta.abs() <= PI {
        Ok(())
    } else {
        Err(Error::Domain(format!("angle {theta} lies outside [-π, π]")))
    }
}

/// Symbol of the shifted Grünwald–Letnikov Riesz matrix.
pub fn eval_riesz_symbol(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_angle(theta)?;
    Ok(riesz_symbol(alpha, theta))
}

fn riesz_symbol(alpha: f64, theta: f64) -> f64 {
    let scale = -(2f64).powf(alpha + 1.0);
    let v = if theta < 0.0 {
        scale * (-theta / 2.0).sin().powf(alpha) * (alpha / 2.0 * (PI + theta) - theta).cos()
    } else {
        scale * (theta / 2.0).sin().powf(alpha) * (alpha / 2.0 * (PI - theta) + theta).cos()
    };
    v.max(0.0)
}

/// `|θ|^α` below `π/2`, `1` from there on.
pub fn eval_clipped_power(alpha: f64, theta: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "clipped power order {alpha} must lie in [1, 2)"
        )));
    }
    check_angle(theta)?;
    Ok(clipped_power(alpha, theta))
}

fn clipped_power(alpha: f64, theta: f64) -> f64 {
    if theta.abs() < FRAC_PI_2 {
        theta.abs().powf(alpha)
    } else {
        1.0
    }
}

/// Upper constant in `1/2 <= |θ|^α / g_α(θ) <= π² / (-8 cos(πα/2))`.
pub fn riesz_ratio_upper_bound(alpha: f64) -> f64 {
    PI * PI / (-8.0 * (PI * alpha / 2.0).cos())
}

/// Lower constant of the same two-sided bound.
pub const RIESZ_RATIO_LOWER_BOUND: f64 = 0.5;

/// Extremes of `|θ|^α / g_α(θ)` over the given sample angles.
pub fn symbol_ratio_bounds(alpha: f64, grid: &[f64]) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if grid.is_empty() {
        return Err(Error::Argument("empty angle grid".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &theta in grid {
        check_angle(theta)?;
        if theta == 0.0 {
            return Err(Error::Argument("ratio grid must exclude θ = 0".into()));
        }
        let r = theta.abs().powf(alpha) / riesz_symbol(alpha, theta);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// Even, nonnegative symbol of one variable.
#[derive(Clone)]
pub enum Symbol1D {
    Riesz {
        alpha: f64,
    },
    AbsPower {
        alpha: f64,
    },
    ClippedPower {
        alpha: f64,
    },
    Constant(f64),
    /// Caller-supplied even function on `[-π, π]`, assumed continuous.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Symbol1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol1D::Riesz { alpha } => write!(f, "Riesz({alpha})"),
            Symbol1D::AbsPower { alpha } => write!(f, "AbsPower({alpha})"),
            Symbol1D::ClippedPower { alpha } => write!(f, "ClippedPower({alpha})"),
            Symbol1D::Constant(c) => write!(f, "Constant({c})"),
            Symbol1D::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Symbol1D {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Symbol1D::Custom(Arc::new(f))
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Symbol1D::Riesz { alpha } => check_alpha(alpha),
            Symbol1D::AbsPower { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::Domain(format!("power {alpha} must be positive")))
            }
            Symbol1D::ClippedPower { alpha } if !(1.0..2.0).contains(&alpha) => Err(Error::Domain(
                format!("clipped power order {alpha} must lie in [1, 2)"),
            )),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        self.validate()?;
        check_angle(theta)?;
        Ok(self.value(theta))
    }

    fn value(&self, theta: f64) -> f64 {
        match self {
            Symbol1D::Riesz { alpha } => riesz_symbol(*alpha, theta),
            Symbol1D::AbsPower { alpha } => theta.abs().powf(*alpha),
            Symbol1D::ClippedPower { alpha } => clipped_power(*alpha, theta),
            Symbol1D::Constant(c) => *c,
            Symbol1D::Custom(f) => f(theta),
        }
    }

    /// Value at the periodic sample `θ_k = 2πk/m` folded into `[-π, π]`.
    /// A sample sitting exactly on a jump gets the mean of both one-sided
    /// limits.
    fn periodic_sample(&self, k: usize, m: usize) -> f64 {
        if let Symbol1D::ClippedPower { alpha } = self {
            if 4 * k == m || 4 * k == 3 * m {
                return 0.5 * (FRAC_PI_2.powf(*alpha) + 1.0);
            }
        }
        let theta = if 2 * k <= m {
            2.0 * PI * k as f64 / m as f64
        } else {
            -2.0 * PI * (m - k) as f64 / m as f64
        };
        self.value(theta)
    }
}

/// Trapezoid estimate of `t_0..t_{n-1}` with `m` samples.
fn trapezoid_coefficients(symbol: &Symbol1D, n: usize, m: usize) -> Vec<f64> {
    let mut buf: Vec<Complex64> = (0..m)
        .map(|k| Complex64::new(symbol.periodic_sample(k, m), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf[..n].iter().map(|c| c.re * scale).collect()
}

/// Fourier coefficients `t_0..t_{count-1}` of an even symbol, accurate to
/// `accuracy` in the max norm (estimated from successive refinements).
pub fn fourier_coefficients_1d(symbol: &Symbol1D, count: usize, accuracy: f64) -> Result<Vec<f64>> {
    symbol.validate()?;
    if count == 0 {
        return Err(Error::Argument("coefficient count must be positive".into()));
    }
    if !(accuracy > 0.0) {
        return Err(Error::Argument(format!(
            "accuracy {accuracy} must be positive"
        )));
    }
    let mut m = (8 * count).max(16).next_power_of_two();
    let mut previous = trapezoid_coefficients(symbol, count, m);
    loop {
        m *= 2;
        let current = trapezoid_coefficients(symbol, count, m);
        let diff = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff < accuracy {
            return Ok(current);
        }
        if m >= MAX_QUADRATURE_SAMPLES {
            return Err(Error::Accuracy {
                target: accuracy,
                diff,
                last: current,
                previous,
            });
        }
        previous = current;
    }
}

/// How per-axis symbols combine into one multivariate symbol.
#[derive(Debug, Clone)]
pub enum Combination {
    /// `Σ_i w_i s_i(θ_i)`.
    WeightedSum(Vec<f64>),
    /// `Σ_i s_i(θ_i) - Π_i r_i(θ_i)` with the `r_i` given here.
    SumMinusProduct(Vec<Symbol1D>),
}

/// Multivariate even symbol built from one-dimensional pieces.
#[derive(Debug, Clone)]
pub struct SymbolMulti {
    terms: Vec<Symbol1D>,
    rule: Combination,
}

impl SymbolMulti {
    pub fn new(terms: Vec<Symbol1D>, rule: Combination) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Argument("symbol needs at least one axis".into()));
        }
        let other_len = match &rule {
            Combination::WeightedSum(w) => {
                if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::Argument("weights must be positive".into()));
                }
                w.len()
            }
            Combination::SumMinusProduct(p) => p.len(),
        };
        if other_len != terms.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                got: other_len,
            });
        }
        for t in &terms {
            t.validate()?;
        }
        if let Combination::SumMinusProduct(p) = &rule {
            for t in p {
                t.validate()?;
            }
        }
        Ok(Self { terms, rule })
    }

    /// `Σ_i w_i g_{α_i}(θ_i)`, the symbol of a Kronecker sum of Riesz matrices.
    pub fn riesz_sum(alphas: &[f64], weights: &[f64]) -> Result<Self> {
        let terms = alphas
            .iter()
            .map(|&alpha| Symbol1D::Riesz { alpha })
            .collect();
        Self::new(terms, Combination::WeightedSum(weights.to_vec()))
    }

    /// `Σ_i l_i |θ_i|^{α_i}`.
    pub fn abs_power_sum(alphas: &[f64], weights: &[f64]) -> Result<Self> {
        let terms = alphas
            .iter()
            .map(|&alpha| Symbol1D::AbsPower { alpha })
            .collect();
        Self::new(terms, Combination::WeightedSum(weights.to_vec()))
    }

    /// `p_{α_1}(θ_1) + p_{α_2}(θ_2) - p_1(θ_1) p_1(θ_2)` with clipped powers.
    pub fn clipped_sum_minus_product(alphas: &[f64]) -> Result<Self> {
        let terms = alphas
            .iter()
            .map(|&alpha| Symbol1D::ClippedPower { alpha })
            .collect();
        let product = alphas
            .iter()
            .map(|_| Symbol1D::ClippedPower { alpha: 1.0 })
            .collect();
        Self::new(terms, Combination::SumMinusProduct(product))
    }

    pub fn ndim(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        Error::check_len(self.ndim(), theta.len())?;
        let mut parts = Vec::with_capacity(theta.len());
        for (s, &th) in self.terms.iter().zip(theta) {
            parts.push(s.eval(th)?);
        }
        Ok(match &self.rule {
            Combination::WeightedSum(w) => parts.iter().zip(w).map(|(p, w)| p * w).sum(),
            Combination::SumMinusProduct(prod) => {
                let mut pr = 1.0;
                for (s, &th) in prod.iter().zip(theta) {
                    pr *= s.eval(th)?;
                }
                parts.iter().sum::<f64>() - pr
            }
        })
    }

    /// Coefficient tensor `t_{j_1..j_m}`, `0 <= j_i < dims[i]`, first index
    /// fastest. Assembled from 1D coefficient sequences: sum terms land on
    /// the coordinate axes, product terms are outer products.
    pub fn coefficient_tensor(&self, dims: &[usize], accuracy: f64) -> Result<Vec<f64>> {
        Error::check_len(self.ndim(), dims.len())?;
        if dims.contains(&0) {
            return Err(Error::Argument(
                "every level must have positive order".into(),
            ));
        }
        let size: usize = dims.iter().product();
        let mut tensor = vec![0.0; size];
        let strides: Vec<usize> = (0..dims.len())
            .map(|i| dims[..i].iter().product())
            .collect();

        let weights: Vec<f64> = match &self.rule {
            Combination::WeightedSum(w) => w.clone(),
            Combination::SumMinusProduct(_) => vec![1.0; self.ndim()],
        };
        for (axis, (sym, w)) in self.terms.iter().zip(&weights).enumerate() {
            let c = fourier_coefficients_1d(sym, dims[axis], accuracy)?;
            for (j, cj) in c.iter().enumerate() {
                tensor[j * strides[axis]] += w * cj;
            }
        }

        if let Combination::SumMinusProduct(prod) = &self.rule {
            let mut outer = vec![1.0; size];
            for (axis, sym) in prod.iter().enumerate() {
                let c = fourier_coefficients_1d(sym, dims[axis], accuracy)?;
                for (idx, v) in outer.iter_mut().enumerate() {
                    *v *= c[(idx / strides[axis]) % dims[axis]];
                }
            }
            for (t, o) in tensor.iter_mut().zip(&outer) {
                *t -= o;
            }
        }
        Ok(tensor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl_kernel::riesz_first_column;

    #[test]
    fn riesz_symbol_values() {
        assert_eq!(eval_riesz_symbol(1.5, 0.0).unwrap(), 0.0);
        let at_pi = eval_riesz_symbol(1.5, PI).unwrap();
        assert!((at_pi - 2f64.powf(2.5)).abs() < 1e-12);
        let a = eval_riesz_symbol(1.5, 0.7).unwrap();
        let b = eval_riesz_symbol(1.5, -0.7).unwrap();
        assert!((a - b).abs() < 1e-15 * a);
        assert!(matches!(eval_riesz_symbol(1.5, 3.2), Err(Error::Domain(_))));
        assert!(matches!(eval_riesz_symbol(2.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ratio_at_pi() {
        let (lo, hi) = symbol_ratio_bounds(1.5, &[PI]).unwrap();
        assert!((lo - 0.98435).abs() < 1e-5);
        assert_eq!(lo, hi);
        assert!((riesz_ratio_upper_bound(1.5) - 1.74472).abs() < 1e-5);
        assert!(symbol_ratio_bounds(1.5, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn ratio_lower_bound_on_dense_grid() {
        let grid: Vec<f64> = (1..=10_000).map(|k| PI * k as f64 / 10_000.0).collect();
        let (lo, hi) = symbol_ratio_bounds(1.2, &grid).unwrap();
        assert!(lo >= 0.5);
        assert!(hi <= riesz_ratio_upper_bound(1.2));
    }

    #[test]
    fn ratio_limit_at_origin() {
        // g_α(θ) ~ -2 cos(πα/2) |θ|^α near zero.
        for alpha in [1.2, 1.8, 1.99] {
            let limit = -1.0 / (2.0 * (PI * alpha / 2.0).cos());
            let (r, _) = symbol_ratio_bounds(alpha, &[1e-6]).unwrap();
            assert!(r > 0.5);
            assert!((r - limit).abs() < 1e-5, "{alpha}: {r} vs {limit}");
        }
        let (r, _) = symbol_ratio_bounds(1.999, &[1e-6]).unwrap();
        assert!((r - 0.5).abs() < 1e-3);
    }

    #[test]
    fn clipped_power_branches() {
        assert!((eval_clipped_power(1.0, PI / 4.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert_eq!(eval_clipped_power(1.9, 3.0).unwrap(), 1.0);
        let below = eval_clipped_power(1.5, FRAC_PI_2 - 1e-12).unwrap();
        assert!((below - FRAC_PI_2.powf(1.5)).abs() < 1e-10);
        let jump = FRAC_PI_2.powf(1.5) - 1.0;
        assert!((below - eval_clipped_power(1.5, FRAC_PI_2).unwrap() - jump).abs() < 1e-10);
        assert!(eval_clipped_power(2.0, 0.1).is_err());
        assert!(eval_clipped_power(1.5, -4.0).is_err());
    }

    #[test]
    fn clipped_power_mean_coefficient() {
        let c = fourier_coefficients_1d(&Symbol1D::ClippedPower { alpha: 1.0 }, 4, 1e-11).unwrap();
        assert!((c[0] - (PI / 8.0 + 0.5)).abs() < 1e-10, "{}", c[0]);
    }

    #[test]
    fn constant_symbol_is_identity_column() {
        let c = fourier_coefficients_1d(&Symbol1D::Constant(1.0), 6, 1e-12).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn riesz_coefficients_match_gl_column() {
        for alpha in [1.1, 1.5, 1.9] {
            let n = 64;
            let q = fourier_coefficients_1d(&Symbol1D::Riesz { alpha }, n, 1e-10).unwrap();
            let col = riesz_first_column(alpha, n).unwrap();
            let err = q
                .iter()
                .zip(col.entries())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "alpha {alpha}: {err}");
        }
    }

    #[test]
    fn quadrature_reports_failure_with_estimates() {
        // |θ|^{0.01} is barely integrable-smooth at the origin; a tiny target
        // cannot be met before the sample cap.
        let sym = Symbol1D::AbsPower { alpha: 0.01 };
        match fourier_coefficients_1d(&sym, 2, 1e-16) {
            Err(Error::Accuracy { last, previous, .. }) => {
                assert_eq!(last.len(), 2);
                assert_eq!(previous.len(), 2);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn multi_symbol_combinations() {
        let p = SymbolMulti::clipped_sum_minus_product(&[1.9, 1.5]).unwrap();
        let v = p.eval(&[3.0, -3.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = p.eval(&[0.5, 0.2]).unwrap();
        let expected = 0.5f64.powf(1.9) + 0.2f64.powf(1.5) - 0.5 * 0.2;
        assert!((v - expected).abs() < 1e-15);
        assert!(p.eval(&[0.1]).is_err());
        assert!(SymbolMulti::riesz_sum(&[1.5, 1.5], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn separable_tensor_lies_on_axes() {
        let s = SymbolMulti::riesz_sum(&[1.3, 1.7], &[2.0, 0.5]).unwrap();
        let dims = [5, 4];
        let t = s.coefficient_tensor(&dims, 1e-11).unwrap();
        let c1 = riesz_first_column(1.3, 5).unwrap();
        let c2 = riesz_first_column(1.7, 4).unwrap();
        for j2 in 0..4 {
            for j1 in 0..5 {
                let mut expected = 0.0;
                if j2 == 0 {
                    expected += 2.0 * c1.entries()[j1];
                }
                if j1 == 0 {
                    expected += 0.5 * c2.entries()[j2];
                }
                assert!((t[j1 + 5 * j2] - expected).abs() < 1e-8);
            }
        }
    }
}
