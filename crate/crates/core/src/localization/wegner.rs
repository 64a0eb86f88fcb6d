use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::fit::slope_through_origin;
use crate::error::{Error, Result};
use crate::freefermion::build_block_hamiltonian;
use crate::model::EnsembleConfig;
use crate::parallel::Executor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerReport {
    pub n: usize,
    pub realizations: usize,
    pub epsilon_grid: Vec<f64>,
    /// Fraction of realizations with `dist(0, sigma(A)) < eps`.
    pub empirical_prob: Vec<f64>,
    /// Least-squares slope of the probability against `eps * n`.
    pub slope_estimate: f64,
    /// Histogram of the gaps `2 dist(0, sigma(A))`.
    pub gap_histogram: Vec<HistogramBin>,
}

/// Empirical distribution of `dist(0, sigma(A))` over the ensemble.
pub fn wegner_gap_stats(cfg: &EnsembleConfig, epsilon_grid: &[f64], bins: usize, exec: &Executor) -> Result<WegnerReport> {
    cfg.validate()?;
    if !cfg.chain_template.conserves_number() {
        return Err(Error::config("gap statistics need an isotropic chain"));
    }
    if epsilon_grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::config("epsilon grid must be finite and non-negative"));
    }
    let dists = exec.try_map(cfg.realizations(), |i| {
        let run = || -> Result<f64> {
            let spec = cfg.realization(i)?;
            let a = build_block_hamiltonian(&spec).a;
            let ev = SymmetricEigen::try_new(a, f64::EPSILON, 0)
                .ok_or_else(|| Error::numerical("eigenvalue iteration did not converge"))?
                .eigenvalues;
            Ok(ev.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())))
        };
        run().map_err(|e| e.with_replay(cfg.seed(), i))
    })?;
    let r = dists.len() as f64;
    let empirical_prob: Vec<f64> = epsilon_grid
        .iter()
        .map(|&eps| dists.iter().filter(|&&d| d < eps).count() as f64 / r)
        .collect();
    let n = cfg.n();
    let x: Vec<f64> = epsilon_grid.iter().map(|e| e * n as f64).collect();
    let slope_estimate = slope_through_origin(&x, &empirical_prob);
    Ok(WegnerReport {
        n,
        realizations: cfg.realizations(),
        epsilon_grid: epsilon_grid.to_vec(),
        empirical_prob,
        slope_estimate,
        gap_histogram: histogram(&dists.iter().map(|d| 2.0 * d).collect::<Vec<_>>(), bins),
    })
}

fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if bins == 0 || values.is_empty() {
        return Vec::new();
    }
    let hi = values.iter().copied().fold(0.0f64, f64::max);
    let width = if hi > 0.0 { hi / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = ((v / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: i as f64 * width,
            hi: (i + 1) as f64 * width,
            count,
        })
        .collect()
}
