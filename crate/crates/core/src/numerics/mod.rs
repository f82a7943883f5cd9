//! Deterministic numeric kernels shared by the rest of the crate: a small
//! dense matrix type, a symmetric eigensolver, the inverse standard normal
//! CDF, and a seeded random stream with Gaussian sampling.
//!
//! Everything here is sized for communication graphs of at most a few hundred
//! nodes, so dense O(M^3) methods are deliberate.

mod eigen;
mod matrix;
mod normal;
mod random;

pub use eigen::{eig_sym, SymmetricSpectrum};
pub use matrix::Mat;
pub use normal::{inv_norm_cdf, norm_cdf};
pub use random::{gaussian_sample, RandomStream};
