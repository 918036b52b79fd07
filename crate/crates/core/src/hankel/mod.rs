//! Bessel functions, Bessel-zero grids and the discrete Fourier-Bessel
//! transform.

mod bessel;
mod grid;
mod plan;

pub use bessel::{bessel_j, bessel_zeros, mcmahon_estimate, MIN_ORDER};
pub use grid::{RadialGrid, RadialProfile};
pub use plan::{radial_fourier, HankelPlan, MIN_PLAN_SIZE};
pub(crate) use plan::check_dimension;
