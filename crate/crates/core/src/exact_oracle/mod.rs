//! Dense many-body simulation of the spin chain.
//!
//! Everything here works on the full `2^n`-dimensional Hilbert space and is
//! used as an independent check of the free-fermion reduction, so nothing in
//! this module depends on [`crate::freefermion`].

mod basis;
mod dynamics;
mod frame;
mod hamiltonian;
mod lanczos;
mod operator;
mod quadrature;

pub use basis::{dimension, site_bit, site_mask, SectorLayout, SectorRule, DENSE_LIMIT};
pub use dynamics::{
    gaussian_cutoff, gaussian_kernel_closed, gaussian_kernel_frequency, gaussian_kernel_time, ground_correlation,
    heisenberg_evolve, quasilocal_approx, quasilocal_limit, quasilocal_remainder,
};
pub use frame::{commutator_norms, CommutatorProbe, FrameOp};
pub use hamiltonian::{build_hamiltonian, hamiltonian_matrix, natural_rule, EvolutionContext, DEGENERACY_TOL};
pub use lanczos::split_norm;
pub use operator::{
    commutator_norm, lowering_matrix, matrix_unit, pauli_matrix, site_matrix, ApplyOperator, Axis, LocalOp,
    ManyBodyOperator, SiteMatrix, C64,
};
pub use quadrature::{integrate, integrate_pieces};
