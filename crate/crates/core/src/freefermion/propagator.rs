use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::FermionDiagonalization;

/// `exp(-i M t) = W^t diag(exp(-i Lambda t), exp(i Lambda t)) W`.
pub fn propagator_entries(d: &FermionDiagonalization, t: f64) -> DMatrix<Complex64> {
    let freq = d.mode_frequencies();
    let cos = DVector::from_iterator(freq.len(), freq.iter().map(|f| (f * t).cos()));
    let sin = DVector::from_iterator(freq.len(), freq.iter().map(|f| -(f * t).sin()));
    let wt = d.w.transpose();
    let re = &wt * DMatrix::from_diagonal(&cos) * &d.w;
    let im = &wt * DMatrix::from_diagonal(&sin) * &d.w;
    DMatrix::from_fn(re.nrows(), re.ncols(), |r, c| Complex64::new(re[(r, c)], im[(r, c)]))
}

/// `max_c | ||column c|| - 1 |`.
pub fn unitarity_residual(p: &DMatrix<Complex64>) -> f64 {
    p.column_iter()
        .map(|c| (c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Time-uniform bound `sum_l |W_lj| |W_lk|` on `|exp(-iMt)_{jk}|` (0-based
/// indices into the 2n-dimensional space).
pub fn mode_overlap_bound(d: &FermionDiagonalization, j: usize, k: usize) -> f64 {
    d.w.column(j)
        .iter()
        .zip(d.w.column(k).iter())
        .map(|(a, b)| (a * b).abs())
        .sum()
}
