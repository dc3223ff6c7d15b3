//! Reproducing kernels and the computable invariants of Cowen-Douglas operators.
//!
//! The crate is organised around [`KernelSpec`], an immutable description of a
//! kernel family on the unit disc, the unit ball or the polydisc. Everything
//! else consumes specs:
//!
//! - [`kernel`]: evaluation of polarized derivatives `∂_z^p ∂̄_w^q K(z, w)`,
//!   normalization, Möbius transport and formal powers.
//! - [`posdef`]: sampled Gram matrices and eigenvalue verdicts, contractivity
//!   and infinite divisibility batteries.
//! - [`curvature`]: curvature forms, the Möbius transformation law, curvature
//!   inequality gaps, pointwise extremality and the `K̃` kernel.
//! - [`localization`]: jet Gram matrices, orthonormalized frames and the
//!   nilpotent local operators.
//! - [`jets`]: jet kernels and module actions, diagonal restriction, the
//!   vanishing submodule of `H ⊗ H` and the `H²₀(𝔻²)` blow-up.
//! - [`flag`]: the two-by-two flag kernel and its complete invariants.
//! - [`homogeneous`]: weighted shifts, homogeneity and elementary bundles.
//! - [`cli`]: the batch front-end behind the `cdkernel` binary.
//!
//! All computations are in double precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curvature;
pub mod domain;
pub mod error;
pub mod flag;
pub mod homogeneous;
pub mod jets;
pub mod kernel;
pub mod linalg;
pub mod localization;
pub mod poly;
pub mod posdef;

pub use domain::{Domain, DomainPoint};
pub use error::{Error, Result};
pub use kernel::{eval_derivative, DerivativeRequest, Family, KernelSpec, Method};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix used for kernel values, Gram matrices and local data.
pub type CMat = nalgebra::DMatrix<C64>;
