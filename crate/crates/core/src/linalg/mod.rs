//! Dense linear algebra and deterministic randomness.

mod cholesky;
mod eigen;
mod matrix;
mod rng;
mod svd;
mod vector;

pub use cholesky::{cholesky, CholeskyFactor};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use matrix::DenseMatrix;
pub use rng::{rng_gaussian, rng_uniform, SeededRng};
pub use svd::{operator_norm, svd_summary, SvdSummary, DEFAULT_RANK_TOL};
pub use vector::{dot, norm, Vector};
