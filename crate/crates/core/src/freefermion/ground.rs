use nalgebra::{DMatrix, DVector};

use super::{DiagonalizationPath, FermionDiagonalization};
use crate::error::{Error, Result};

/// Relative size below which an Anderson eigenvalue counts as zero.
const ZERO_MODE_TOL: f64 = 64.0 * f64::EPSILON;

/// Ground-state quantities of an isotropic chain in the signed-eigenvalue
/// convention: modes with negative energy are occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateData {
    /// `-sum_j |lambda_j|`.
    pub e0: f64,
    /// `2 min_j |lambda_j|`.
    pub gap: f64,
    /// `occupation[j]` iff `lambda_j < 0`.
    pub occupation: Vec<bool>,
    /// `U^t diag(occupation) U`, the two-point matrix `<c_j^* c_k>`.
    pub projection_minus: DMatrix<f64>,
    /// Some `lambda_j` vanishes and the ground state is not unique.
    pub degenerate: bool,
}

pub fn ground_state_data(d: &FermionDiagonalization) -> Result<GroundStateData> {
    if d.path != DiagonalizationPath::IsotropicEigen {
        return Err(Error::config("ground-state data needs the isotropic (signed eigenvalue) path"));
    }
    let scale = d.lambda.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let min_abs = d.lambda.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let occupation: Vec<bool> = d.lambda.iter().map(|&l| l < 0.0).collect();
    let occ = DVector::from_iterator(d.n, occupation.iter().map(|&o| if o { 1.0 } else { 0.0 }));
    let projection_minus = d.u.transpose() * DMatrix::from_diagonal(&occ) * &d.u;
    Ok(GroundStateData {
        e0: -d.lambda.iter().map(|l| l.abs()).sum::<f64>(),
        gap: 2.0 * min_abs,
        occupation,
        projection_minus,
        degenerate: min_abs <= ZERO_MODE_TOL * scale,
    })
}

/// `<psi_0, c_j^* c_k psi_0>` for 1-based sites.
pub fn two_point_function(gs: &GroundStateData, j: usize, k: usize) -> Result<f64> {
    let n = gs.occupation.len();
    for s in [j, k] {
        if s == 0 || s > n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
    }
    if gs.degenerate {
        return Err(Error::Degenerate {
            gap: gs.gap,
            replay: None,
        });
    }
    Ok(gs.projection_minus[(j - 1, k - 1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freefermion::{build_block_hamiltonian, diagonalize};
    use crate::model::ChainSpec;

    fn gs(nu: Vec<f64>) -> GroundStateData {
        let h = build_block_hamiltonian(&ChainSpec::isotropic_chain(1.0, nu).unwrap());
        ground_state_data(&diagonalize(&h, DiagonalizationPath::IsotropicEigen).unwrap()).unwrap()
    }

    #[test]
    fn two_site_half_filling() {
        let g = gs(vec![0.0, 0.0]);
        assert!((g.e0 + 2.0).abs() < 1e-14);
        assert!((g.gap - 2.0).abs() < 1e-14);
        assert_eq!(g.occupation, vec![true, false]);
        for x in g.projection_minus.iter() {
            assert!((x - 0.5).abs() < 1e-14);
        }
        assert!((two_point_function(&g, 1, 2).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn strong_field_is_empty() {
        let nu = vec![2.5, 3.1, 2.2, 4.0, 2.9];
        let g = gs(nu.clone());
        assert!(g.occupation.iter().all(|&o| !o));
        assert!((g.e0 + nu.iter().sum::<f64>()).abs() < 1e-12);
        assert!(g.projection_minus.amax() < 1e-15);
    }

    #[test]
    fn single_negative_site() {
        let g = gs(vec![-3.0]);
        assert_eq!(g.e0, -3.0);
        assert_eq!(g.gap, 6.0);
        assert_eq!(g.occupation, vec![true]);
    }

    #[test]
    fn projection_is_idempotent() {
        let g = gs(vec![0.4, -1.3, 0.2, 0.9, -0.6, 1.7, -0.1]);
        let p = &g.projection_minus;
        assert!((p * p - p).amax() < 1e-12);
        assert!((p - p.transpose()).amax() < 1e-14);
        for j in 1..=7 {
            let v = two_point_function(&g, j, j).unwrap();
            assert!((-1e-14..=1.0 + 1e-14).contains(&v));
        }
    }

    #[test]
    fn zero_mode_is_degenerate() {
        // Odd clean chain: the middle eigenvalue of A vanishes.
        let g = gs(vec![0.0; 5]);
        assert!(g.degenerate);
        assert!(matches!(two_point_function(&g, 1, 2), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn anisotropic_path_is_rejected() {
        let h = build_block_hamiltonian(&ChainSpec::isotropic_chain(1.0, vec![0.1, 0.2]).unwrap());
        let d = diagonalize(&h, DiagonalizationPath::AnisotropicSvd).unwrap();
        assert!(ground_state_data(&d).is_err());
    }
}
