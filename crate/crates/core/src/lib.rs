//! Dense SVD and PCA with three interchangeable factorization routes.
//!
//! * [`svd::truncated_svd`] eigendecomposes the small Gram matrix `AᵀA` and
//!   recovers `U` column by column.
//! * [`svd::randomized_pca`] sketches the range of `A` with a Gaussian test
//!   matrix and optional power steps.
//! * [`svd::krylov_svd`] keeps every power block of the sketch, giving a larger
//!   subspace for the same `l` and `i`.
//!
//! [`cost`] has closed-form FLOP and storage models for each route, and
//! [`bench`] times them on Gaussian matrices next to those models.

pub mod bench;
pub mod cost;
pub mod eig;
pub mod error;
pub mod io;
pub mod matrix;
pub mod pca;
pub mod qr;
pub mod random;
pub mod svd;

pub use error::{LinalgError, Result};
pub use matrix::DenseMatrix;
pub use random::RngSeed;
pub use svd::{Method, MethodParams, SvdResult};
