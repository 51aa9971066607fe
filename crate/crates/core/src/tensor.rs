//! Layout helpers for multi-index vectors. The first index runs fastest:
//! `offset(i_1, ..., i_m) = i_1 + n_1 (i_2 + n_2 (i_3 + ...))`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) fn total_size(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// `(stride, count_inner, count_outer)` for the given axis.
fn axis_layout(dims: &[usize], axis: usize) -> (usize, usize) {
    let inner: usize = dims[..axis].iter().product();
    let outer: usize = dims[axis + 1..].iter().product();
    (inner, outer)
}

/// Calls `f` on every 1D pencil along `axis`, gathered into `scratch`.
/// Whatever `f` leaves in the pencil is scattered back.
pub(crate) fn for_each_pencil<T: Copy>(
    data: &mut [T],
    dims: &[usize],
    axis: usize,
    scratch: &mut Vec<T>,
    mut f: impl FnMut(&mut [T]),
) {
    let n = dims[axis];
    let (inner, outer) = axis_layout(dims, axis);
    let block = inner * n;
    scratch.clear();
    if n == 0 || data.is_empty() {
        return;
    }
    scratch.extend(std::iter::repeat_n(data[0], n));
    for o in 0..outer {
        let base = o * block;
        for i in 0..inner {
            let start = base + i;
            for (k, s) in scratch.iter_mut().enumerate() {
                *s = data[start + k * inner];
            }
            f(scratch);
            for (k, s) in scratch.iter().enumerate() {
                data[start + k * inner] = *s;
            }
        }
    }
}

/// Like [`for_each_pencil`] but reads pencils from `src` and adds the
/// result of `f` into `dst` (same layout).
pub(crate) fn accumulate_pencils(
    src: &[f64],
    dst: &mut [f64],
    dims: &[usize],
    axis: usize,
    mut f: impl FnMut(&[f64], &mut [f64]),
) {
    let n = dims[axis];
    let (inner, outer) = axis_layout(dims, axis);
    let block = inner * n;
    let mut pencil = vec![0.0; n];
    let mut out = vec![0.0; n];
    for o in 0..outer {
        let base = o * block;
        for i in 0..inner {
            let start = base + i;
            for (k, p) in pencil.iter_mut().enumerate() {
                *p = src[start + k * inner];
            }
            f(&pencil, &mut out);
            for (k, y) in out.iter().enumerate() {
                dst[start + k * inner] += *y;
            }
        }
    }
}

/// Forward and inverse complex FFT plans for each axis of a fixed shape.
#[derive(Clone)]
pub(crate) struct NdFft {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("dims", &self.dims).finish()
    }
}

impl NdFft {
    pub(crate) fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims: dims.to_vec(),
            forward: dims.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub(crate) fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub(crate) fn len(&self) -> usize {
        total_size(&self.dims)
    }

    /// Unnormalized forward transform over all axes.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform over all axes, normalized so `inverse(forward(x)) = x`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        debug_assert_eq!(data.len(), self.len());
        let mut scratch = Vec::new();
        let mut fft_scratch = Vec::new();
        for (axis, plan) in plans.iter().enumerate() {
            if self.dims[axis] <= 1 {
                continue;
            }
            fft_scratch.resize(plan.get_inplace_scratch_len(), Complex64::default());
            for_each_pencil(data, &self.dims, axis, &mut scratch, |p| {
                plan.process_with_scratch(p, &mut fft_scratch)
            });
        }
    }
}
