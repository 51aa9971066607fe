//! Model problems: Riesz fractional diffusion on boxes with a manufactured
//! polynomial solution, and a two-level Toeplitz system whose symbol is a
//! clipped power sum.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::generating_functions::SymbolMulti;
use crate::gl_kernel::{check_alpha, riesz_first_column};
use crate::preconditioners::{
    build_multilevel_tau, CirculantPreconditioner, MultilevelTauPreconditioner,
    TauKronPreconditioner,
};
use crate::toeplitz_ops::{KronSumOperator, MultilevelToeplitz, SymToeplitz1D};

/// `c(α) = -1 / (2 cos(απ/2))`, positive on `(1, 2)`.
pub fn riesz_constant(alpha: f64) -> f64 {
    -1.0 / (2.0 * (alpha * PI / 2.0).cos())
}

/// One spatial direction of a box problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub alpha: f64,
    /// Diffusion coefficient.
    pub d: f64,
    pub a: f64,
    pub b: f64,
    /// Interior grid points.
    pub n: usize,
}

impl Axis {
    pub fn unit(alpha: f64, n: usize) -> Self {
        Self {
            alpha,
            d: 1.0,
            a: 0.0,
            b: 1.0,
            n,
        }
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n + 1) as f64
    }

    /// `d c(α) / h^α`.
    pub fn weight(&self) -> f64 {
        self.d * riesz_constant(self.alpha) / self.h().powf(self.alpha)
    }

    /// Interior point `k` (zero based).
    pub fn point(&self, k: usize) -> f64 {
        self.a + (k + 1) as f64 * self.h()
    }
}

/// Riesz fractional diffusion in one to three dimensions with homogeneous
/// Dirichlet data and the solution `Π (x_i - a_i)² (b_i - x_i)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszProblem {
    axes: Vec<Axis>,
}

impl RieszProblem {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::Argument(format!(
                "dimension count {} must be 1, 2 or 3",
                axes.len()
            )));
        }
        for ax in &axes {
            check_alpha(ax.alpha)?;
            if !(ax.d.is_finite() && ax.d > 0.0) {
                return Err(Error::Argument(format!(
                    "diffusion coefficient {} must be positive",
                    ax.d
                )));
            }
            if !(ax.a.is_finite() && ax.b.is_finite() && ax.a < ax.b) {
                return Err(Error::Argument(format!(
                    "interval [{}, {}] is empty",
                    ax.a, ax.b
                )));
            }
            if ax.n == 0 {
                return Err(Error::Argument("each axis needs interior points".into()));
            }
        }
        Ok(Self { axes })
    }

    /// 1D problem on `[0, 1]` with `d = 1`.
    pub fn example1(alpha: f64, n: usize) -> Result<Self> {
        Self::new(vec![Axis::unit(alpha, n)])
    }

    /// Unit square, `d = (1, 1)`, same `n` on both axes.
    pub fn example2(alphas: [f64; 2], n: usize) -> Result<Self> {
        Self::new(alphas.iter().map(|&a| Axis::unit(a, n)).collect())
    }

    /// Unit cube, `d = (1, 1, 1)`, same `n` on every axis.
    pub fn example3(alphas: [f64; 3], n: usize) -> Result<Self> {
        Self::new(alphas.iter().map(|&a| Axis::unit(a, n)).collect())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::weight).collect()
    }

    pub fn manufactured(&self) -> ManufacturedSolution {
        ManufacturedSolution {
            axes: self.axes.clone(),
        }
    }

    /// Calls `f(index, point)` for every grid point, first index fastest.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let dims = self.dims();
        let mut idx = vec![0; dims.len()];
        let mut x = vec![0.0; dims.len()];
        for pos in 0..self.size() {
            let mut rest = pos;
            for (i, &d) in dims.iter().enumerate() {
                idx[i] = rest % d;
                rest /= d;
                x[i] = self.axes[i].point(idx[i]);
            }
            f(pos, &x);
        }
    }

    /// Exact solution sampled on the grid.
    pub fn exact_on_grid(&self) -> Vec<f64> {
        let m = self.manufactured();
        let mut out = vec![0.0; self.size()];
        self.for_each_point(|pos, x| out[pos] = m.exact(x));
        out
    }
}

/// Exact solution and source term of a [`RieszProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSolution {
    axes: Vec<Axis>,
}

/// Riemann–Liouville derivative of order `α` of `s²(L - s)²` from the left
/// end, at distance `s`.
fn y1(s: f64, alpha: f64, len: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    2.0 * len * len / gamma(3.0 - alpha) * s.powf(2.0 - alpha)
        - 12.0 * len / gamma(4.0 - alpha) * s.powf(3.0 - alpha)
        + 24.0 / gamma(5.0 - alpha) * s.powf(4.0 - alpha)
}

fn bump(x: f64, ax: &Axis) -> f64 {
    let v = (x - ax.a) * (ax.b - x);
    v * v
}

impl ManufacturedSolution {
    pub fn exact(&self, x: &[f64]) -> f64 {
        self.axes
            .iter()
            .zip(x)
            .map(|(ax, &xi)| bump(xi, ax))
            .product()
    }

    /// `Σ_i d_i / (2 cos(πα_i/2)) Π_{k≠i} u_k(x_k) (y1(x_i - a_i) + y1(b_i - x_i))`.
    pub fn source(&self, x: &[f64]) -> Result<f64> {
        Error::check_len(self.axes.len(), x.len())?;
        for (ax, &xi) in self.axes.iter().zip(x) {
            if !(xi >= ax.a && xi <= ax.b) {
                return Err(Error::Domain(format!(
                    "point {xi} lies outside [{}, {}]",
                    ax.a, ax.b
                )));
            }
        }
        let mut total = 0.0;
        for (i, ax) in self.axes.iter().enumerate() {
            let len = ax.b - ax.a;
            let others: f64 = self
                .axes
                .iter()
                .zip(x)
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, (axk, &xk))| bump(xk, axk))
                .product();
            let frac = y1(x[i] - ax.a, ax.alpha, len) + y1(ax.b - x[i], ax.alpha, len);
            total += ax.d / (2.0 * (PI * ax.alpha / 2.0).cos()) * others * frac;
        }
        Ok(total)
    }
}

/// Source term of the unit-square problem at one point.
pub fn source_term_example2(x1: f64, x2: f64, alpha: [f64; 2], d: [f64; 2]) -> Result<f64> {
    let axes = alpha
        .iter()
        .zip(d)
        .map(|(&alpha, d)| Axis {
            alpha,
            d,
            a: 0.0,
            b: 1.0,
            n: 1,
        })
        .collect();
    ManufacturedSolution { axes }.source(&[x1, x2])
}

/// `Σ_i I ⊗ w_i G^{(α_i)} ⊗ I` and the source sampled at the grid points.
pub fn build_riesz_system(p: &RieszProblem) -> Result<(KronSumOperator, Vec<f64>)> {
    let levels = p
        .axes()
        .iter()
        .map(|ax| SymToeplitz1D::new(riesz_first_column(ax.alpha, ax.n)?.into_vec()))
        .collect::<Result<Vec<_>>>()?;
    let op = KronSumOperator::new(levels, p.weights())?;
    let m = p.manufactured();
    let mut rhs = vec![0.0; p.size()];
    let mut err = None;
    p.for_each_point(|pos, x| match m.source(x) {
        Ok(v) => rhs[pos] = v,
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok((op, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub max: f64,
    /// `sqrt(Π h_i Σ e_k²)`.
    pub l2: f64,
}

pub fn error_norms(p: &RieszProblem, solution: &[f64]) -> Result<ErrorNorms> {
    Error::check_len(p.size(), solution.len())?;
    let exact = p.exact_on_grid();
    let cell: f64 = p.axes().iter().map(Axis::h).product();
    let (max, sq) = exact
        .iter()
        .zip(solution)
        .fold((0.0f64, 0.0), |(m, s), (e, u)| {
            let d = (e - u).abs();
            (m.max(d), s + d * d)
        });
    Ok(ErrorNorms {
        max,
        l2: (cell * sq).sqrt(),
    })
}

/// Quadrature accuracy for the clipped-power coefficients.
pub const EXAMPLE4_QUADRATURE_TOL: f64 = 1e-9;

/// Seed of the default right-hand side of the two-level Toeplitz system.
pub const EXAMPLE4_DEFAULT_SEED: u64 = 0;

/// Right-hand side choice for the two-level Toeplitz system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum RhsKind {
    Ones,
    /// Independent standard normal entries from a seeded ChaCha8 stream.
    Normal {
        seed: u64,
    },
}

impl Default for RhsKind {
    fn default() -> Self {
        RhsKind::Normal {
            seed: EXAMPLE4_DEFAULT_SEED,
        }
    }
}

impl RhsKind {
    pub fn vector(&self, len: usize) -> Vec<f64> {
        match *self {
            RhsKind::Ones => vec![1.0; len],
            RhsKind::Normal { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
            }
        }
    }
}

/// Two-level Toeplitz system generated by
/// `p_{α_1}(θ_1) + p_{α_2}(θ_2) - p_1(θ_1) p_1(θ_2)` together with its
/// preconditioners.
#[derive(Debug, Clone)]
pub struct Example4System {
    pub matrix: MultilevelToeplitz,
    /// `τ(G)` with `G = I ⊗ G^{(α_1)} + G^{(α_2)} ⊗ I` (unit weights).
    pub tau_g: TauKronPreconditioner,
    /// Natural τ matrix of `B`, possibly indefinite.
    pub tau_b: MultilevelTauPreconditioner,
    /// Two-level Strang circulant of `B`, possibly indefinite.
    pub circulant: Option<CirculantPreconditioner>,
    pub rhs: Vec<f64>,
}

pub fn build_example4_system(
    alpha: [f64; 2],
    n: [usize; 2],
    rhs: RhsKind,
) -> Result<Example4System> {
    for &a in &alpha {
        check_alpha(a)?;
    }
    if n.iter().any(|&k| k < 2) {
        return Err(Error::Argument("each level needs order at least 2".into()));
    }
    let symbol = SymbolMulti::clipped_sum_minus_product(&alpha)?;
    let coeffs = symbol.coefficient_tensor(&n, EXAMPLE4_QUADRATURE_TOL)?;
    let matrix = MultilevelToeplitz::new(n.to_vec(), coeffs)?;
    let tau_g = TauKronPreconditioner::from_columns(
        vec![
            riesz_first_column(alpha[0], n[0])?.into_vec(),
            riesz_first_column(alpha[1], n[1])?.into_vec(),
        ],
        vec![1.0, 1.0],
    )?;
    let tau_b = build_multilevel_tau(&matrix)?;
    let circulant = CirculantPreconditioner::strang_multilevel(&matrix).ok();
    let rhs = rhs.vector(n[0] * n[1]);
    Ok(Example4System {
        matrix,
        tau_g,
        tau_b,
        circulant,
        rhs,
    })
}
