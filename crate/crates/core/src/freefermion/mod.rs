//! Free-fermion reduction of the XY chain.
//!
//! The many-body dynamics of `c`-operators is generated by the `2n x 2n`
//! matrix `M`, so every quantity here costs polynomial time in `n`.

mod block;
mod diagonalize;
mod ground;
mod propagator;

pub use block::{build_block_hamiltonian, reorder_tight_binding, BlockHamiltonian};
pub use diagonalize::{
    diagonalization_residual, diagonalize, orthogonality_residual, DiagonalizationPath, FermionDiagonalization,
};
pub use ground::{ground_state_data, two_point_function, GroundStateData};
pub use propagator::{mode_overlap_bound, propagator_entries, unitarity_residual};

use crate::error::Result;
use crate::model::ChainSpec;

/// Preferred path for a chain: signed eigenvalues when `B = 0`.
pub fn natural_path(spec: &ChainSpec) -> DiagonalizationPath {
    if spec.conserves_number() {
        DiagonalizationPath::IsotropicEigen
    } else {
        DiagonalizationPath::AnisotropicSvd
    }
}

/// Block matrix and its diagonalization along the natural path.
pub fn solve(spec: &ChainSpec) -> Result<(BlockHamiltonian, FermionDiagonalization)> {
    let h = build_block_hamiltonian(spec);
    let d = diagonalize(&h, natural_path(spec))?;
    Ok((h, d))
}
