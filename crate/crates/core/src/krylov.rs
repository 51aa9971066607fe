//! Preconditioned conjugate gradients with residual history.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::preconditioners::Preconditioner;
use crate::toeplitz_ops::LinearOperator;

/// Library default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Cutoff used when reproducing iteration tables.
pub const TABLE_MAX_ITER: usize = 1_000;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Keep iterating when `⟨r, P⁻¹r⟩ <= 0` instead of failing.
    pub allow_indefinite: bool,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            allow_indefinite: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖r_q‖ / ‖r_0‖` from the recurrence, starting with 1.
    pub residual_history: Vec<f64>,
    /// `‖b - A x‖ / ‖b - A x_0‖` recomputed at termination.
    pub true_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
    #[serde(skip)]
    pub solution: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` from `x0` (zero when `None`), stopping once
/// `‖r_q‖ / ‖r_0‖ < tol`.
pub fn pcg(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &PcgOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    let n = a.dim();
    Error::check_len(n, b.len())?;
    Error::check_len(n, p.dim())?;
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::Argument(format!(
            "tolerance {} must be positive",
            opts.tol
        )));
    }
    let mut x = match x0 {
        Some(x0) => {
            Error::check_len(n, x0.len())?;
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut r = b.to_vec();
    let mut ap = vec![0.0; n];
    if x0.is_some() {
        a.apply(&x, &mut ap)?;
        for (ri, v) in r.iter_mut().zip(&ap) {
            *ri -= v;
        }
    }
    let r0 = norm(&r);
    if !r0.is_finite() {
        return Err(Error::Breakdown("initial residual is not finite".into()));
    }
    let mut history = vec![1.0];
    if r0 == 0.0 {
        return Ok(SolveReport {
            iterations: 0,
            residual_history: history,
            true_residual: 0.0,
            converged: true,
            wall_time: start.elapsed().as_secs_f64(),
            solution: x,
        });
    }

    let mut z = vec![0.0; n];
    p.apply_inverse(&r, &mut z)?;
    let mut rz = dot(&r, &z);
    let mut dir = z.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if !rz.is_finite() {
            return Err(Error::Breakdown(format!(
                "⟨r, P⁻¹r⟩ = {rz} at iteration {iterations}"
            )));
        }
        if rz <= 0.0 && !opts.allow_indefinite {
            return Err(Error::Definiteness(format!(
                "⟨r, P⁻¹r⟩ = {rz:e} at iteration {iterations}: preconditioner is not positive definite"
            )));
        }
        a.apply(&dir, &mut ap)?;
        let pap = dot(&dir, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            return Err(Error::Breakdown(format!(
                "⟨p, Ap⟩ = {pap} at iteration {iterations}"
            )));
        }
        let step = rz / pap;
        for ((xi, ri), (di, api)) in x.iter_mut().zip(r.iter_mut()).zip(dir.iter().zip(&ap)) {
            *xi += step * di;
            *ri -= step * api;
        }
        iterations += 1;
        let rel = norm(&r) / r0;
        if !rel.is_finite() {
            return Err(Error::Breakdown(format!(
                "residual is not finite at iteration {iterations}"
            )));
        }
        history.push(rel);
        if rel < opts.tol {
            converged = true;
            break;
        }
        p.apply_inverse(&r, &mut z)?;
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (di, zi) in dir.iter_mut().zip(&z) {
            *di = zi + beta * *di;
        }
    }

    a.apply(&x, &mut ap)?;
    let true_res: Vec<f64> = b.iter().zip(&ap).map(|(bi, v)| bi - v).collect();
    Ok(SolveReport {
        iterations,
        residual_history: history,
        true_residual: norm(&true_res) / r0,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
        solution: x,
    })
}
