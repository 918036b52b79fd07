//! Default numerical settings shared by the library and the command line.
//!
//! | setting                      | value      |
//! |------------------------------|------------|
//! | grid size `N`                | 512        |
//! | cutoff radius `R`            | 40         |
//! | Galerkin dimension `k`       | 12         |
//! | Newton tolerance             | 1e-10      |
//! | Newton iteration cap         | 100        |
//! | random seed                  | 0xC0FFEE   |
//! | multi-start budget           | 64         |
//! | deflation radius             | 1e-3       |
//! | best-constant seeds          | 8          |
//! | best-constant iteration cap  | 2000       |
//! | best-constant tolerance      | 1e-7       |
//! | shooting start radius        | 1e-6       |

pub const GRID_SIZE: usize = 512;
pub const CUTOFF: f64 = 40.0;
pub const BASIS_DIM: usize = 12;
pub const TOLERANCE: f64 = 1e-10;
pub const MAX_NEWTON_ITER: usize = 100;
pub const SEED: u64 = 0xC0FFEE;
pub const START_BUDGET: usize = 64;
pub const DEFLATION_RADIUS: f64 = 1e-3;
pub const ESTIMATOR_SEEDS: usize = 8;
pub const ESTIMATOR_MAX_ITER: usize = 2000;
pub const ESTIMATOR_TOLERANCE: f64 = 1e-7;
pub const SHOOTING_START: f64 = 1e-6;
