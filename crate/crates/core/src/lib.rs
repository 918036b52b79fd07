//! Spectral toolkit for radially symmetric functions on `R^n`.
//!
//! The crate is organised bottom-up:
//!
//! * [`hankel`]: Bessel functions, Bessel-zero grids and a discrete,
//!   self-inverse Fourier-Bessel transform.
//! * [`decarli`]: the three-parameter Hankel-type operators
//!   `y^mu int (xy)^nu f(x) J_alpha(xy) dx`, their `L^p -> L^q` admissibility
//!   test and scaling identities.
//! * [`space`]: `H^s` norms, Bessel potentials `A^s = (I - Laplacian)^(s/2)`
//!   and power-weighted `L^q` norms of radial profiles.
//! * [`embedding`]: admissibility and numerical exploration of the radial
//!   embedding `H^s_rad -> L^q(|x|^c dx)`.
//! * [`system`]: the weighted Hamiltonian system
//!   `-Lap u + u = |x|^a |v|^(p-2) v`, `-Lap v + v = |x|^b |u|^(q-2) u`,
//!   its variational functional and geometry.
//! * [`solver`]: Galerkin critical-point search with deflation and an
//!   ODE shooting cross-check.

// `!(x > 0.0)` is how arguments are checked so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod decarli;
pub mod embedding;
pub mod error;
pub mod hankel;
pub mod solver;
pub mod space;
pub mod system;

pub use error::{Error, Result};
