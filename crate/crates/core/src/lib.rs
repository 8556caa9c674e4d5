// `!(a < b)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Direct and inverse eigenvalue workbench.
//!
//! The crate solves two direct spectral problems and learns their inverses:
//!
//! * [`sturm`]: lowest eigenvalues of `-y'' + q y = λ y` on `(0, 1)` with
//!   Robin conditions, for the symmetric potentials `q(x) = 1 - exp(b (x - 1/2)²)`.
//! * [`transmission`]: real interior transmission eigenvalues of the unit disc
//!   with a piecewise constant refractive index, both as exact roots of the
//!   separation-of-variables determinant and from a radial spectral-Galerkin
//!   quadratic eigenproblem.
//! * [`dataset`]: parameter sweeps that turn the direct solvers into
//!   (eigenvalues → coefficients) training sets, with CSV + manifest persistence.
//! * [`mlcore`]: from-scratch multi-output regressors (kNN, random forest, MLP),
//!   scaling, metrics, grid search with k-fold CV, and permutation importance.
//! * [`cli`]: the `invspec` command-line front end.
//!
//! Supporting numerics live in [`numkernel`] (dense LU and QR eigenvalues) and
//! [`specfun`] (Bessel functions of integer order).

pub mod cli;
pub mod dataset;
pub mod error;
pub mod mlcore;
pub mod numkernel;
pub mod specfun;
pub mod sturm;
pub mod transmission;

pub use error::{Error, Result};
