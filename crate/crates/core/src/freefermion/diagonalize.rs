use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use super::BlockHamiltonian;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalizationPath {
    /// Singular value decomposition of `A + B`; `lambda >= 0`.
    AnisotropicSvd,
    /// Eigendecomposition of `A` (requires `B = 0`); `lambda` signed.
    IsotropicEigen,
}

impl DiagonalizationPath {
    pub fn tag(&self) -> &'static str {
        match self {
            DiagonalizationPath::AnisotropicSvd => "anisotropic_svd",
            DiagonalizationPath::IsotropicEigen => "isotropic_eigen",
        }
    }
}

/// Orthogonal `W` with `W M W^t = diag(Lambda, -Lambda)`.
///
/// `U` and `V` hold the one-body modes as rows: `U (A + B) V^t = Lambda` on the
/// anisotropic path, `U A U^t = Lambda` (and `V = U`) on the isotropic one.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionDiagonalization {
    pub n: usize,
    pub path: DiagonalizationPath,
    pub w: DMatrix<f64>,
    /// Ascending.
    pub lambda: Vec<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// `E^(n) = sum_j lambda_j`.
    pub energy_offset: f64,
}

impl FermionDiagonalization {
    /// Frequencies of the 2n modes, `(lambda_1..lambda_n, -lambda_1..-lambda_n)`;
    /// mode `l` is row `l` of `W`.
    pub fn mode_frequencies(&self) -> Vec<f64> {
        self.lambda.iter().copied().chain(self.lambda.iter().map(|x| -x)).collect()
    }

    /// `diag(Lambda, -Lambda)`.
    pub fn diagonal_form(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(self.mode_frequencies()))
    }
}

/// Index of the first entry of largest magnitude.
fn pivot(col: impl Iterator<Item = f64>) -> (usize, f64) {
    col.enumerate().fold((0, 0.0), |best, (i, x)| {
        if x.abs() > best.1.abs() {
            (i, x)
        } else {
            best
        }
    })
}

/// Stable ascending order: ties keep their original column order.
fn ascending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    order
}

pub fn diagonalize(h: &BlockHamiltonian, path: DiagonalizationPath) -> Result<FermionDiagonalization> {
    let n = h.n;
    let max_iter = 1000 * n.max(10);
    let (lambda, u, v) = match path {
        DiagonalizationPath::IsotropicEigen => {
            if !h.is_block_diagonal() {
                return Err(Error::config("isotropic path requires a vanishing anisotropy block"));
            }
            let (values, vectors) = crate::linalg::symmetric_eigen(&h.a)
                .map_err(|_| Error::numerical(format!("symmetric eigensolver did not converge (n = {n})")))?;
            let mut u = DMatrix::zeros(n, n);
            let mut lambda = Vec::with_capacity(n);
            for (row, vec) in vectors.column_iter().enumerate() {
                let sign = if pivot(vec.iter().copied()).1 < 0.0 { -1.0 } else { 1.0 };
                u.row_mut(row).copy_from(&(vec.transpose() * sign));
                lambda.push(values[row]);
            }
            let v = u.clone();
            (lambda, u, v)
        }
        DiagonalizationPath::AnisotropicSvd => {
            let s = &h.a + &h.b;
            let svd = SVD::try_new(s, true, true, f64::EPSILON, max_iter)
                .ok_or_else(|| Error::numerical(format!("singular value decomposition did not converge (n = {n})")))?;
            let (left, right_t) = (svd.u.unwrap(), svd.v_t.unwrap());
            let order = ascending(svd.singular_values.as_slice());
            let mut u = DMatrix::zeros(n, n);
            let mut v = DMatrix::zeros(n, n);
            let mut lambda = Vec::with_capacity(n);
            for (row, &col) in order.iter().enumerate() {
                let lvec = left.column(col);
                // Left and right vectors flip together to keep U S V^t = Lambda.
                let sign = if pivot(lvec.iter().copied()).1 < 0.0 { -1.0 } else { 1.0 };
                u.row_mut(row).copy_from(&(lvec.transpose() * sign));
                v.row_mut(row).copy_from(&(right_t.row(col) * sign));
                lambda.push(svd.singular_values[col]);
            }
            (lambda, u, v)
        }
    };

    let mut w = DMatrix::zeros(2 * n, 2 * n);
    match path {
        DiagonalizationPath::IsotropicEigen => {
            w.view_mut((0, 0), (n, n)).copy_from(&u);
            w.view_mut((n, n), (n, n)).copy_from(&u);
        }
        DiagonalizationPath::AnisotropicSvd => {
            let plus = (&v + &u) * 0.5;
            let minus = (&v - &u) * 0.5;
            w.view_mut((0, 0), (n, n)).copy_from(&plus);
            w.view_mut((0, n), (n, n)).copy_from(&minus);
            w.view_mut((n, 0), (n, n)).copy_from(&minus);
            w.view_mut((n, n), (n, n)).copy_from(&plus);
        }
    }
    let energy_offset = lambda.iter().sum();
    Ok(FermionDiagonalization {
        n,
        path,
        w,
        lambda,
        u,
        v,
        energy_offset,
    })
}

/// `max |W W^t - I|`.
pub fn orthogonality_residual(d: &FermionDiagonalization) -> f64 {
    let m = &d.w * d.w.transpose();
    (m - DMatrix::identity(2 * d.n, 2 * d.n)).amax()
}

/// `max |W M W^t - diag(Lambda, -Lambda)|`.
pub fn diagonalization_residual(h: &BlockHamiltonian, d: &FermionDiagonalization) -> f64 {
    let m = &d.w * &h.m * d.w.transpose();
    (m - d.diagonal_form()).amax()
}
