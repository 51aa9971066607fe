//! Structured solvers for the multi-level Toeplitz systems that come from
//! Riesz fractional diffusion equations discretized with the shifted
//! Grünwald–Letnikov formula.
//!
//! Operators apply through FFT-based circulant embeddings, τ matrices are
//! diagonalized by the discrete sine transform, and conjugate gradients
//! run against any [`preconditioners::Preconditioner`].

mod error;
mod tensor;

pub mod generating_functions;
pub mod gl_kernel;
pub mod krylov;
pub mod preconditioners;
pub mod problems;
pub mod sine_transform;
pub mod spectral;
pub mod toeplitz_ops;

pub use error::{Error, Result};
pub use krylov::{pcg, PcgOptions, SolveReport};
pub use preconditioners::Preconditioner;
pub use toeplitz_ops::{DenseMaterialize, LinearOperator};
