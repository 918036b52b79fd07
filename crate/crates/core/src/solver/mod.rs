//! Galerkin critical-point search for the Hamiltonian system and an
//! independent shooting solver for the `s = t = 1` case.

mod basis;
mod newton;
mod shooting;

pub use basis::{build_basis, GalerkinBasis};
pub use newton::{
    find_multiple, newton_solve, start_point, CriticalPoint, NewtonOptions, SearchOptions, SearchResult, SolveStatus,
};

pub use shooting::{shooting_oracle, ShootingOptions, ShootingSolution};
