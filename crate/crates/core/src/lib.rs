//! Multiclass semi-supervised classification on multilayer graphs.
//!
//! The pipeline combines per-layer symmetric normalized Laplacians into a
//! power mean Laplacian, extracts its smallest eigenpairs with matrix-free
//! Krylov methods, and runs a convexity-splitting graph Allen-Cahn scheme in
//! the resulting spectral basis.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | weight operators, layers, degrees, `L_sym` products |
//! | [`kernel`] | radial kernels used for feature-based layers |
//! | [`fastsum`] | NFFT-based `O(n)` kernel summation for `d <= 3` |
//! | [`krylov`] | thick-restart Lanczos and Krylov matrix powers |
//! | [`powermean`] | `I - L_1`, `L_{p,delta}^p` and their eigenpairs |
//! | [`allencahn`] | multiclass and binary Allen-Cahn classifiers |
//! | [`datapipe`] | feature grouping, SBM generation, images, labels |
//!
//! Class ids are 0-based throughout the library; file formats use 1-based ids.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::single_range_in_vec_init
)]

pub mod allencahn;
pub mod datapipe;
pub mod error;
pub mod fastsum;
pub mod graph;
pub mod kernel;
pub mod krylov;
pub mod linalg;
pub mod powermean;

pub use error::{Error, Result};
