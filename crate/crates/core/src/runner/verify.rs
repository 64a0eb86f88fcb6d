//! Cross-engine invariant suite.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_oracle::{
    build_hamiltonian, gaussian_kernel_frequency, gaussian_kernel_time, EvolutionContext, LocalOp, DENSE_LIMIT,
};
use crate::freefermion::{
    diagonalization_residual, orthogonality_residual, propagator_entries, solve, unitarity_residual,
    FermionDiagonalization,
};
use crate::model::EnsembleConfig;
use crate::parallel::Executor;

pub const CAR_TOL: f64 = 1e-12;
pub const STRUCTURE_TOL: f64 = 1e-8;
pub const UNITARITY_TOL: f64 = 1e-10;
pub const EQUIVALENCE_TOL: f64 = 1e-8;
pub const KERNEL_TOL: f64 = 1e-8;

/// Times at which propagators are compared against the oracle.
pub const CHECK_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

/// Deliberate damage applied to each diagonalization before checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tamper {
    None,
    /// Negate column `c` of `W` (taken mod `2n`).
    FlipWColumn(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub name: String,
    pub realization: Option<usize>,
    pub seed: u64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub oracle_n: Option<usize>,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Largest residual among checks called `name`.
    pub fn max_residual(&self, name: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.name == name)
            .map(|c| c.residual)
            .reduce(f64::max)
    }
}

fn check(name: &str, realization: Option<usize>, seed: u64, residual: f64, tolerance: f64) -> VerifyCheck {
    VerifyCheck {
        name: name.to_string(),
        realization,
        seed,
        residual,
        tolerance,
        // NaN residuals fail.
        passed: residual <= tolerance,
    }
}

/// Largest entry of `{x, y} - delta I`, computed exactly from the monomial images.
pub fn anticommutator_residual(x: &LocalOp, y: &LocalOp, delta: f64) -> f64 {
    let xy = x.compose(y);
    let yx = y.compose(x);
    let dim = 1usize << x.n();
    let mut worst = 0.0f64;
    for s in 0..dim {
        let mut col: Vec<(usize, Complex64)> = Vec::with_capacity(3);
        let mut add = |row: usize, z: Complex64| match col.iter_mut().find(|(r, _)| *r == row) {
            Some((_, acc)) => *acc += z,
            None => col.push((row, z)),
        };
        if let Some((r, z)) = xy.image(s) {
            add(r, z);
        }
        if let Some((r, z)) = yx.image(s) {
            add(r, z);
        }
        add(s, Complex64::new(-delta, 0.0));
        worst = col.iter().map(|(_, z)| z.norm()).fold(worst, f64::max);
    }
    worst
}

/// Largest CAR residual over all pairs of Jordan-Wigner operators on `n` sites.
pub fn car_residual(n: usize) -> Result<f64> {
    let c: Vec<LocalOp> = (1..=n).map(|j| LocalOp::jordan_wigner_c(n, j)).collect::<Result<_>>()?;
    let cd: Vec<LocalOp> = c.iter().map(|x| x.adjoint()).collect();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let delta = if j == k { 1.0 } else { 0.0 };
            worst = worst.max(anticommutator_residual(&c[j], &cd[k], delta));
            worst = worst.max(anticommutator_residual(&c[j], &c[k], 0.0));
        }
    }
    Ok(worst)
}

/// Sorted multiset `{sum_j s_j lambda_j : s in {+1, -1}^n}`.
pub fn free_fermion_spectrum(lambda: &[f64]) -> Vec<f64> {
    let abs: Vec<f64> = lambda.iter().map(|l| l.abs()).collect();
    let base: f64 = -abs.iter().sum::<f64>();
    let mut out = Vec::with_capacity(1 << abs.len());
    for mask in 0usize..(1 << abs.len()) {
        let raised: f64 = abs.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, l)| 2.0 * l).sum();
        out.push(base + raised);
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn spectrum_residual(ctx: &EvolutionContext, d: &FermionDiagonalization) -> f64 {
    free_fermion_spectrum(&d.lambda)
        .iter()
        .zip(ctx.spectrum())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

pub fn gap_residual(ctx: &EvolutionContext, d: &FermionDiagonalization) -> f64 {
    let min = d.lambda.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    (ctx.gap() - 2.0 * min).abs()
}

/// Oracle `tau_t(c_j)` against `sum_k M_{jk}(2t) c_k + M_{j,n+k}(2t) c_k^*`,
/// largest entry of the difference in the computational basis, over all `j`
/// and `times`.
pub fn propagator_expansion_residual(ctx: &EvolutionContext, d: &FermionDiagonalization, times: &[f64]) -> Result<f64> {
    let n = ctx.n();
    let (energies, v) = ctx.eigenbasis()?;
    let dim = v.nrows();
    let vt = v.transpose();
    // Jordan-Wigner operators in the eigenframe (real).
    let frames: Vec<DMatrix<f64>> = (1..=n)
        .map(|k| {
            let c = LocalOp::jordan_wigner_c(n, k)?;
            let mut cv = DMatrix::zeros(dim, dim);
            for s in 0..dim {
                if let Some((r, z)) = c.image(s) {
                    for col in 0..dim {
                        cv[(r, col)] += z.re * v[(s, col)];
                    }
                }
            }
            Ok(&vt * cv)
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for &t in times {
        let p = propagator_entries(d, 2.0 * t);
        let (cos, sin): (Vec<f64>, Vec<f64>) = energies.iter().map(|e| ((e * t).cos(), (e * t).sin())).unzip();
        for j in 0..n {
            let mut re = DMatrix::zeros(dim, dim);
            let mut im = DMatrix::zeros(dim, dim);
            let f = &frames[j];
            for b in 0..dim {
                for a in 0..dim {
                    let x = f[(a, b)];
                    if x != 0.0 {
                        re[(a, b)] = x * (cos[a] * cos[b] + sin[a] * sin[b]);
                        im[(a, b)] = x * (sin[a] * cos[b] - cos[a] * sin[b]);
                    }
                }
            }
            for k in 0..n {
                let (zc, zd) = (p[(j, k)], p[(j, n + k)]);
                re -= &frames[k] * zc.re + frames[k].transpose() * zd.re;
                im -= &frames[k] * zc.im + frames[k].transpose() * zd.im;
            }
            let back_re = &v * re * &vt;
            let back_im = &v * im * &vt;
            let r = back_re.zip_map(&back_im, |x, y| x.hypot(y)).amax();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Largest disagreement between the two quadratures of the Gaussian kernel
/// over `{0.5, 1, 2} x {0.5, 1} x {0.1, 0.01}`.
pub fn kernel_identity_residual() -> Result<f64> {
    let mut worst = 0.0f64;
    for e in [0.5, 1.0, 2.0] {
        for alpha in [0.5, 1.0] {
            for eps in [0.1, 0.01] {
                let lhs = gaussian_kernel_time(e, alpha, eps)?;
                let rhs = gaussian_kernel_frequency(e, alpha, eps)?;
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

fn tampered(mut d: FermionDiagonalization, tamper: Tamper) -> FermionDiagonalization {
    if let Tamper::FlipWColumn(c) = tamper {
        let c = c % (2 * d.n);
        d.w.column_mut(c).neg_mut();
    }
    d
}

fn realization_checks(cfg: &EnsembleConfig, i: usize, oracle: bool, tamper: Tamper) -> Result<Vec<VerifyCheck>> {
    let seed = cfg.seed();
    let spec = cfg.realization(i)?;
    let (h, d) = solve(&spec)?;
    let d = tampered(d, tamper);
    let scale = h.max_norm().max(1.0);
    let mut out = vec![
        check("orthogonality", Some(i), seed, orthogonality_residual(&d), STRUCTURE_TOL * scale),
        check("diagonalization", Some(i), seed, diagonalization_residual(&h, &d), STRUCTURE_TOL * scale),
    ];
    let unit = CHECK_TIMES
        .iter()
        .map(|&t| unitarity_residual(&propagator_entries(&d, t)))
        .fold(0.0, f64::max);
    out.push(check("unitarity", Some(i), seed, unit, UNITARITY_TOL));
    if oracle {
        let ctx = build_hamiltonian(&spec, cfg.oracle_cap)?;
        out.push(check("spectrum", Some(i), seed, spectrum_residual(&ctx, &d), EQUIVALENCE_TOL));
        out.push(check("gap", Some(i), seed, gap_residual(&ctx, &d), EQUIVALENCE_TOL));
        let r = propagator_expansion_residual(&ctx, &d, &CHECK_TIMES)?;
        out.push(check("propagator_expansion", Some(i), seed, r, EQUIVALENCE_TOL));
    }
    Ok(out)
}

/// Run every invariant check on each realization of `cfg`. Oracle-backed
/// checks run when the chain fits under both the oracle cap and the dense
/// limit.
pub fn verify_suite(cfg: &EnsembleConfig, exec: &Executor, tamper: Tamper) -> Result<VerifyReport> {
    cfg.validate()?;
    if cfg.oracle_cap < 6 {
        return Err(Error::config("verify needs oracle_cap >= 6"));
    }
    let n = cfg.n();
    let oracle = n <= cfg.oracle_cap.min(DENSE_LIMIT);
    let car_n = n.min(DENSE_LIMIT);
    let seed = cfg.seed();
    let mut checks = vec![
        check("car", None, seed, car_residual(car_n)?, CAR_TOL),
        check("gaussian_identity", None, seed, kernel_identity_residual()?, KERNEL_TOL),
    ];
    let per = exec.try_map(cfg.realizations(), |i| {
        realization_checks(cfg, i, oracle, tamper).map_err(|e| e.with_replay(seed, i))
    })?;
    checks.extend(per.into_iter().flatten());
    Ok(VerifyReport {
        n,
        oracle_n: oracle.then_some(n),
        checks,
    })
}
