//! Discrete Schrödinger operators `H = -Δ + α F(κ)` on flat circles and tori,
//! where the potential field `κ` is constrained to a fixed mean `κ₀`.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers:
//!
//! * [`geometry`]: uniform periodic grids, quadrature and the analytic
//!   Laplace eigenbasis of the flat circle and rectangular torus;
//! * [`potentials`]: fixed-mean potential fields, coupling functions and the
//!   concentrated (spike / ball) potential families;
//! * [`operator`]: Fourier-Galerkin and second-order finite-difference assembly;
//! * [`eigensolve`]: a dense symmetric eigensolver (Householder + implicit QL,
//!   with a Jacobi fallback) and a spectral Poisson solver;
//! * [`perturbation`]: second-order eigenvalue perturbation in the potential
//!   amplitude and the critical coupling;
//! * [`experiments`]: sweeps that turn the limit statements into numbers.

#![no_std]
// dense kernels index several arrays with one counter; `!(x > 0.0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eigensolve;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod operator;
pub mod perturbation;
pub mod potentials;

mod error;
mod num;

pub use error::{Error, Result};

pub use geometry::{laplace_eigenbasis, LaplaceEigenpair, ManifoldGrid, ManifoldKind};

pub use eigensolve::{eigh, eigh_with, poisson_solve, residual, EigenResult, Solver};
pub use operator::{assemble, Discretization, SpectralOperator};
pub use potentials::{CouplingFunction, CouplingKind, PotentialField, Smoothing};
