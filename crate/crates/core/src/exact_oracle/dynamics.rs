use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hamiltonian::EvolutionContext;
use super::operator::{ApplyOperator, ManyBodyOperator};
use super::quadrature::integrate_pieces;
use crate::error::{Error, Result};

fn split(m: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex64> {
    re.zip_map(im, Complex64::new)
}

/// `V^t X V` with the real orthogonal eigenbasis `V`.
fn to_eigenframe(v: &DMatrix<f64>, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (re, im) = split(x);
    join(&(v.tr_mul(&(&re * v))), &(v.tr_mul(&(&im * v))))
}

fn from_eigenframe(v: &DMatrix<f64>, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (re, im) = split(x);
    let vt = v.transpose();
    join(&(v * &re * &vt), &(v * &im * &vt))
}

/// `exp(iHt) A exp(-iHt)` from the stored eigendecomposition.
pub fn heisenberg_evolve(ctx: &EvolutionContext, a: &ManyBodyOperator, t: f64) -> Result<ManyBodyOperator> {
    if a.n != ctx.n() {
        return Err(Error::config("operator and chain sizes differ"));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    let (e, v) = ctx.eigenbasis()?;
    let mut x = to_eigenframe(&v, &a.matrix);
    let phase: Vec<Complex64> = e.iter().map(|&ea| Complex64::from_polar(1.0, ea * t)).collect();
    for c in 0..x.ncols() {
        for r in 0..x.nrows() {
            x[(r, c)] *= phase[r] * phase[c].conj();
        }
    }
    ManyBodyOperator::new(a.n, from_eigenframe(&v, &x), Some((1, a.n)))
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Truncated ground-state correlation `<AB> - <A><B>`.
pub fn ground_correlation(ctx: &EvolutionContext, a: &impl ApplyOperator, b: &impl ApplyOperator) -> Result<Complex64> {
    if ctx.is_degenerate() {
        return Err(Error::Degenerate {
            gap: ctx.gap(),
            replay: None,
        });
    }
    let psi = ctx.ground_vector_complex();
    let b_psi = b.apply_to(&psi);
    let a_psi = a.apply_to(&psi);
    let ab = inner(&psi, &a.apply_to(&b_psi));
    let ea = inner(&psi, &a_psi);
    let eb = inner(&psi, &b_psi);
    Ok(ab - ea * eb)
}

/// Integrand cutoff: `exp(-alpha t^2) < 1e-14` beyond `t_cut`.
pub fn gaussian_cutoff(alpha: f64) -> f64 {
    (1e14f64.ln() / alpha).sqrt()
}

fn check_params(alpha: f64, epsilon: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::config(format!("need alpha > 0 and epsilon > 0, got ({alpha}, {epsilon})")));
    }
    Ok(())
}

/// Breakpoints on `[0, t_cut]`: geometric near the origin down to the
/// Lorentzian width `eps`, then pieces no longer than half an oscillation.
fn time_breakpoints(e: f64, eps: f64, t_cut: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = eps / 16.0;
    while x < t_cut.min(1.0) {
        pts.push(x);
        x *= 2.0;
    }
    let piece = if e == 0.0 { 0.5 } else { (std::f64::consts::PI / e.abs()).min(0.5) };
    let mut x = *pts.last().unwrap() + piece;
    while x < t_cut {
        pts.push(x);
        x += piece;
    }
    pts.push(t_cut);
    pts
}

/// `(1/(2 pi i)) int exp(iEt) exp(-alpha t^2) / (t - i eps) dt` over the real
/// line, folded onto `t > 0` and integrated numerically:
/// `(1/pi) int_0^inf (t sin Et + eps cos Et) exp(-alpha t^2) / (t^2 + eps^2) dt`.
pub fn gaussian_kernel_time(e: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    check_params(alpha, epsilon)?;
    let t_cut = gaussian_cutoff(alpha);
    let f = |t: f64| (t * (e * t).sin() + epsilon * (e * t).cos()) * (-alpha * t * t).exp() / (t * t + epsilon * epsilon);
    let (v, _) = integrate_pieces(f, &time_breakpoints(e, epsilon, t_cut), 1e-13, 1e-13)?;
    Ok(v / std::f64::consts::PI)
}

/// `(1/(2 sqrt(pi alpha))) int_0^inf exp(-eps w) exp(-(w - E)^2 / (4 alpha)) dw`
/// by quadrature over the Gaussian's effective support.
pub fn gaussian_kernel_frequency(e: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    check_params(alpha, epsilon)?;
    let half = 2.0 * alpha.sqrt() * 1e16f64.ln().sqrt();
    let lo = (e - half).max(0.0);
    let hi = (e + half).max(lo);
    let mut pts = vec![lo];
    if e > lo && e < hi {
        pts.push(e);
    }
    pts.push(hi);
    let f = |w: f64| (-epsilon * w - (w - e) * (w - e) / (4.0 * alpha)).exp();
    let (v, _) = integrate_pieces(f, &pts, 1e-15, 1e-13)?;
    Ok(v / (2.0 * (std::f64::consts::PI * alpha).sqrt()))
}

/// Closed form of the frequency side:
/// `exp(alpha eps^2 - eps E) erfc((2 alpha eps - E) / (2 sqrt alpha)) / 2`.
pub fn gaussian_kernel_closed(e: f64, alpha: f64, epsilon: f64) -> f64 {
    0.5 * (alpha * epsilon * epsilon - epsilon * e).exp() * libm::erfc((2.0 * alpha * epsilon - e) / (2.0 * alpha.sqrt()))
}

/// Quasi-local approximation `(1/(2 pi i)) int tau_t(B) exp(-alpha t^2)/(t - i eps) dt`.
/// In the eigenframe each element `B_ab` is multiplied by the scalar kernel at
/// `E_a - E_b`, which is integrated numerically.
pub fn quasilocal_approx(ctx: &EvolutionContext, b: &ManyBodyOperator, alpha: f64, epsilon: f64) -> Result<ManyBodyOperator> {
    check_params(alpha, epsilon)?;
    let (e, v) = ctx.eigenbasis()?;
    let mut x = to_eigenframe(&v, &b.matrix);
    let mut cache: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    for c in 0..x.ncols() {
        for r in 0..x.nrows() {
            let de = e[r] - e[c];
            let key = de.to_bits();
            let g = match cache.get(&key) {
                Some(g) => *g,
                None => {
                    let g = gaussian_kernel_time(de, alpha, epsilon)?;
                    cache.insert(key, g);
                    g
                }
            };
            x[(r, c)] *= g;
        }
    }
    ManyBodyOperator::new(b.n, from_eigenframe(&v, &x), Some((1, b.n)))
}

/// Small-`eps` limit of [`quasilocal_approx`]: evaluated at `eps` and `eps/2`,
/// extrapolated linearly, and rejected if the two differ by more than `tol`
/// relative to `||B||_max`.
pub fn quasilocal_limit(ctx: &EvolutionContext, b: &ManyBodyOperator, alpha: f64, tol: f64) -> Result<ManyBodyOperator> {
    let eps = 1e-8;
    let b1 = quasilocal_approx(ctx, b, alpha, eps)?;
    let b2 = quasilocal_approx(ctx, b, alpha, eps / 2.0)?;
    let diff = b1.sub(&b2).max_abs();
    if diff > tol * b.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::numerical(format!("quasi-local approximation unstable in epsilon (change {diff:e})")));
    }
    Ok(b2.scale(2.0.into()).sub(&b1))
}

/// `||P (B - B(alpha, eps)) psi_0||` with `P` the projection off the ground
/// state; the first remainder in the clustering argument.
pub fn quasilocal_remainder(ctx: &EvolutionContext, b: &ManyBodyOperator, b_approx: &ManyBodyOperator) -> f64 {
    let psi = ctx.ground_vector_complex();
    let d = b.sub(b_approx).apply(&psi);
    let overlap = inner(&psi, &d);
    let rest: Vec<Complex64> = d.iter().zip(&psi).map(|(x, p)| x - overlap * p).collect();
    DVector::from_vec(rest).norm()
}
