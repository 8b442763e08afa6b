//! Difference-of-convex optimization through difference-of-Moreau-envelopes smoothing.
//!
//! A DC objective `F = φ − g` with `φ = f + h` is smoothed into
//! `F_μ = M_{μφ} − M_{μg}`, which is Lipschitz differentiable and shares the
//! stationary points and global minima of `F`. The crate provides
//!
//! * dense kernels ([`linalg`]),
//! * the problem model ([`func`]) and proximal catalog ([`prox`]),
//! * the smoothed objective ([`moreau`]),
//! * gradient, inexact-gradient and DCA-family solvers ([`unconstrained`]),
//! * augmented Lagrangian solvers for `Ax = b` constraints ([`constrained`]),
//! * seeded instance generators with JSON persistence ([`instance`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod apg;
pub mod constrained;
pub mod error;
pub mod func;
pub mod instance;
pub mod linalg;
pub mod moreau;
pub mod prox;
pub mod trace;
pub mod unconstrained;

pub use error::{DcError, Result};
pub use linalg::{DenseMatrix, Vector};
