use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use riesz_tau::preconditioners::{
    for_kron_sum, IdentityPreconditioner, Preconditioner, PreconditionerKind,
};
use riesz_tau::problems::{
    build_example4_system, build_riesz_system, error_norms, Axis, ErrorNorms, Example4System,
    RhsKind, RieszProblem,
};
use riesz_tau::toeplitz_ops::{KronSumOperator, LinearOperator};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeConvention {
    /// `--n` is the number of interior grid points (the matrix order).
    Points,
    /// `--n` is the number of grid intervals, so the order is `n - 1`.
    Intervals,
}

impl SizeConvention {
    pub fn order(self, n: usize) -> Result<usize, CliError> {
        match self {
            SizeConvention::Points => Ok(n),
            SizeConvention::Intervals if n >= 2 => Ok(n - 1),
            SizeConvention::Intervals => Err(CliError::Usage(format!(
                "{n} intervals leave no interior points"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhsArg {
    Ones,
    Normal,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Built-in problem: 1-3 are the 1D/2D/3D diffusion problems on the
    /// unit cube, 4 the two-level Toeplitz system with a clipped symbol.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub example: Option<u8>,

    /// Number of space dimensions for an explicit problem.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub dim: Option<u8>,

    /// Fractional orders, one value or one per dimension.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,

    /// Diffusion coefficients, one value or one per dimension.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub d: Vec<f64>,

    /// Intervals `a:b`, one or one per dimension.
    #[arg(long, value_delimiter = ',', value_parser = parse_interval, allow_hyphen_values = true)]
    pub domain: Vec<(f64, f64)>,

    /// Grid size per dimension, read according to `--size-convention`.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,

    #[arg(long, value_enum, default_value_t = SizeConvention::Points)]
    pub size_convention: SizeConvention,

    /// Right-hand side of example 4.
    #[arg(long, value_enum)]
    pub rhs: Option<RhsArg>,

    /// Seed of the normal right-hand side of example 4.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

fn broadcast<T: Copy>(
    name: &str,
    values: &[T],
    dim: usize,
    default: Option<T>,
) -> Result<Vec<T>, CliError> {
    match (values.len(), default) {
        (0, Some(v)) => Ok(vec![v; dim]),
        (0, None) => Err(CliError::Usage(format!("--{name} is required"))),
        (1, _) => Ok(vec![values[0]; dim]),
        (k, _) if k == dim => Ok(values.to_vec()),
        (k, _) => Err(CliError::Usage(format!(
            "--{name} has {k} values for {dim} dimensions"
        ))),
    }
}

/// Fully resolved problem, as stored in a run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Riesz {
        example: Option<u8>,
        axes: Vec<Axis>,
    },
    Toeplitz2 {
        alpha: [f64; 2],
        n: [usize; 2],
        rhs: RhsKind,
    },
}

impl ProblemArgs {
    pub fn resolve(&self) -> Result<ProblemSpec, CliError> {
        if self.example == Some(4) {
            return self.resolve_toeplitz();
        }
        if self.rhs.is_some() || self.seed.is_some() {
            return Err(CliError::Usage(
                "--rhs and --seed apply to example 4 only".into(),
            ));
        }
        let dim = match (self.example, self.dim) {
            (Some(e), Some(d)) if e != d => {
                return Err(CliError::Usage(format!(
                    "example {e} is {e}-dimensional, not {d}"
                )))
            }
            (Some(e), _) => e as usize,
            (None, Some(d)) => d as usize,
            (None, None) => {
                return Err(CliError::Usage("give --example or --dim".into()));
            }
        };
        let (alpha_default, n_default) = match self.example {
            Some(1) => (Some(1.2), Some(63)),
            Some(2) => (None, Some(63)),
            Some(3) => (None, Some(15)),
            _ => (None, None),
        };
        let alpha = match (self.example, self.alpha.is_empty()) {
            (Some(2), true) => vec![1.1, 1.2],
            (Some(3), true) => vec![1.1, 1.2, 1.3],
            _ => broadcast("alpha", &self.alpha, dim, alpha_default)?,
        };
        if self.example.is_some() && (!self.d.is_empty() || !self.domain.is_empty()) {
            return Err(CliError::Usage(
                "--d and --domain are fixed by --example".into(),
            ));
        }
        let d = broadcast("d", &self.d, dim, Some(1.0))?;
        let domain = broadcast("domain", &self.domain, dim, Some((0.0, 1.0)))?;
        let n = broadcast("n", &self.n, dim, n_default)?;
        let axes = (0..dim)
            .map(|i| {
                Ok(Axis {
                    alpha: alpha[i],
                    d: d[i],
                    a: domain[i].0,
                    b: domain[i].1,
                    n: self.size_convention.order(n[i])?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        // Validate now so bad input is a usage error.
        RieszProblem::new(axes.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(ProblemSpec::Riesz {
            example: self.example,
            axes,
        })
    }

    fn resolve_toeplitz(&self) -> Result<ProblemSpec, CliError> {
        if matches!(self.dim, Some(d) if d != 2) {
            return Err(CliError::Usage("example 4 is two-dimensional".into()));
        }
        if !self.d.is_empty() || !self.domain.is_empty() {
            return Err(CliError::Usage("example 4 takes no --d or --domain".into()));
        }
        let alpha = if self.alpha.is_empty() {
            vec![1.9, 1.5]
        } else {
            broadcast("alpha", &self.alpha, 2, None)?
        };
        let n = broadcast("n", &self.n, 2, Some(64))?;
        let n = [
            self.size_convention.order(n[0])?,
            self.size_convention.order(n[1])?,
        ];
        if alpha.iter().any(|a| !(a > &1.0 && a < &2.0)) {
            return Err(CliError::Usage(format!(
                "orders {alpha:?} must lie in (1, 2)"
            )));
        }
        if n.iter().any(|&k| k < 2) {
            return Err(CliError::Usage(
                "example 4 needs order at least 2 per level".into(),
            ));
        }
        let rhs = match (self.rhs, self.seed) {
            (Some(RhsArg::Ones), Some(_)) => {
                return Err(CliError::Usage("--seed needs --rhs normal".into()))
            }
            (Some(RhsArg::Ones), None) => RhsKind::Ones,
            (_, seed) => RhsKind::Normal {
                seed: seed.unwrap_or(riesz_tau::problems::EXAMPLE4_DEFAULT_SEED),
            },
        };
        Ok(ProblemSpec::Toeplitz2 {
            alpha: [alpha[0], alpha[1]],
            n,
            rhs,
        })
    }
}

impl ProblemSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            ProblemSpec::Toeplitz2 {
                rhs: RhsKind::Normal { seed },
                ..
            } => Some(*seed),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<System, CliError> {
        Ok(match self {
            ProblemSpec::Riesz { axes, .. } => {
                let problem = RieszProblem::new(axes.clone())?;
                let (op, rhs) = build_riesz_system(&problem)?;
                System::Riesz { problem, op, rhs }
            }
            ProblemSpec::Toeplitz2 { alpha, n, rhs } => {
                System::Toeplitz2(Box::new(build_example4_system(*alpha, *n, *rhs)?))
            }
        })
    }
}

pub enum System {
    Riesz {
        problem: RieszProblem,
        op: KronSumOperator,
        rhs: Vec<f64>,
    },
    Toeplitz2(Box<Example4System>),
}

impl System {
    pub fn operator(&self) -> &dyn LinearOperator {
        match self {
            System::Riesz { op, .. } => op,
            System::Toeplitz2(sys) => &sys.matrix,
        }
    }

    pub fn rhs(&self) -> &[f64] {
        match self {
            System::Riesz { rhs, .. } => rhs,
            System::Toeplitz2(sys) => &sys.rhs,
        }
    }

    /// For example 4, `tau` is τ of the Riesz sum and `tau-natural` is τ of
    /// the matrix itself.
    pub fn preconditioner(
        &self,
        kind: PreconditionerKind,
    ) -> Result<Box<dyn Preconditioner>, CliError> {
        match self {
            System::Riesz { op, .. } => {
                if kind == PreconditionerKind::Banded && op.levels().len() != 1 {
                    return Err(CliError::Usage(
                        "the banded preconditioner is one-dimensional only".into(),
                    ));
                }
                Ok(for_kron_sum(op, kind)?)
            }
            System::Toeplitz2(sys) => match kind {
                PreconditionerKind::Tau => Ok(Box::new(sys.tau_g.clone())),
                PreconditionerKind::TauNatural => Ok(Box::new(sys.tau_b.clone())),
                PreconditionerKind::None => {
                    Ok(Box::new(IdentityPreconditioner::new(sys.rhs.len())))
                }
                PreconditionerKind::Circulant => match &sys.circulant {
                    Some(c) => Ok(Box::new(c.clone())),
                    None => Err(CliError::Numerical(
                        "the two-level circulant is singular".into(),
                    )),
                },
                PreconditionerKind::Banded => Err(CliError::Usage(
                    "the banded preconditioner is one-dimensional only".into(),
                )),
            },
        }
    }

    pub fn errors(&self, solution: &[f64]) -> Result<Option<ErrorNorms>, CliError> {
        match self {
            System::Riesz { problem, .. } => Ok(Some(error_norms(problem, solution)?)),
            System::Toeplitz2(_) => Ok(None),
        }
    }
}
