use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::fit::{fit_exponential, ExpFit};
use super::pairs::sample_pairs;
use super::stats::Table;
use crate::error::Result;
use crate::freefermion::{self, DiagonalizationPath, FermionDiagonalization};
use crate::model::EnsembleConfig;
use crate::parallel::Executor;

pub const METHOD_TAG: &str = "grid_sup+eigencorrelator";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorRow {
    pub j: usize,
    pub k: usize,
    pub distance: usize,
    pub grid_sup_mean: f64,
    pub eigencorr_mean: f64,
    /// Standard error of `grid_sup_mean`.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub distance: usize,
    pub pairs: usize,
    pub grid_sup_mean: f64,
    pub eigencorr_mean: f64,
    pub stderr: f64,
}

/// `(C, eta)` with `E sup_t |M_jk(t)| <= C exp(-eta |j - k|)` on every
/// tabulated pair, using the eigencorrelator upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub c: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub n: usize,
    pub realizations: usize,
    pub seed: u64,
    pub method_tag: String,
    pub rows: Vec<CorrelatorRow>,
    pub by_distance: Vec<DistanceRow>,
    /// Fit of the grid-maximum means.
    pub fit: ExpFit,
    /// Fit of the eigencorrelator means.
    pub eigencorr_fit: ExpFit,
    pub envelope: Option<Envelope>,
}

impl LocalizationReport {
    pub fn fit_c(&self) -> f64 {
        self.fit.c
    }

    pub fn fit_eta(&self) -> f64 {
        self.fit.eta
    }

    pub fn fit_r2(&self) -> f64 {
        self.fit.r2
    }

    pub fn localized(&self) -> bool {
        self.fit.exponential
    }
}

/// Per-pair values for one realization: grid maximum of
/// `|M_jk(t)| + |M_{j,n+k}(t)|` and the eigenvector-modulus bound
/// `sum_l |W_lj| (|W_lk| + |W_l,n+k|)`. Sites are 1-based.
pub fn realization_correlator(d: &FermionDiagonalization, pairs: &[(usize, usize)], times: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = d.n;
    let anomalous = d.path == DiagonalizationPath::AnisotropicSvd;
    // Isotropic chains only couple modes 0..n to sites 0..n.
    let modes = if anomalous { 2 * n } else { n };
    let freq = d.mode_frequencies();
    let p = pairs.len();
    let cols = if anomalous { 2 * p } else { p };
    let mut coef = DMatrix::zeros(modes, cols);
    let mut eig = vec![0.0; p];
    for (c, &(j, k)) in pairs.iter().enumerate() {
        let (j, k) = (j - 1, k - 1);
        let mut bound = 0.0;
        for l in 0..2 * n {
            let wj = d.w[(l, j)];
            bound += wj.abs() * (d.w[(l, k)].abs() + d.w[(l, n + k)].abs());
            if l < modes {
                coef[(l, c)] = wj * d.w[(l, k)];
                if anomalous {
                    coef[(l, p + c)] = wj * d.w[(l, n + k)];
                }
            }
        }
        eig[c] = bound;
    }
    let cos = DMatrix::from_fn(times.len(), modes, |r, l| (freq[l] * times[r]).cos());
    let sin = DMatrix::from_fn(times.len(), modes, |r, l| (freq[l] * times[r]).sin());
    let re = &cos * &coef;
    let im = &sin * &coef;
    let mut grid = vec![0.0f64; p];
    for r in 0..times.len() {
        for (c, g) in grid.iter_mut().enumerate() {
            let mut v = re[(r, c)].hypot(im[(r, c)]);
            if anomalous {
                v += re[(r, p + c)].hypot(im[(r, p + c)]);
            }
            *g = g.max(v);
        }
    }
    (grid, eig)
}

fn distances_of(pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut ds: Vec<usize> = pairs.iter().map(|(j, k)| k - j).collect();
    ds.sort_unstable();
    ds.dedup();
    ds
}

fn distance_averages(pairs: &[(usize, usize)], ds: &[usize], values: &[f64]) -> Vec<f64> {
    ds.iter()
        .map(|&d| {
            let (sum, count) = pairs
                .iter()
                .zip(values)
                .filter(|((j, k), _)| k - j == d)
                .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
            sum / count as f64
        })
        .collect()
}

/// Pairs tabulated for an ensemble: distances `0..=d_max` of the window.
pub fn correlator_pairs(cfg: &EnsembleConfig) -> Vec<(usize, usize)> {
    sample_pairs(cfg.n(), cfg.edge, cfg.distance_window.d_max, cfg.pairs_per_distance)
}

pub fn envelope_from(rows: &[CorrelatorRow], fit: &ExpFit) -> Option<Envelope> {
    if !(fit.eta > 0.0 && fit.eta.is_finite()) {
        return None;
    }
    let c = rows
        .iter()
        .map(|r| r.eigencorr_mean * (fit.eta * r.distance as f64).exp())
        .fold(0.0, f64::max);
    Some(Envelope { c, eta: fit.eta })
}

/// Ensemble-averaged propagator correlator with decay fits.
pub fn dynloc_correlator(cfg: &EnsembleConfig, exec: &Executor) -> Result<LocalizationReport> {
    cfg.validate()?;
    let pairs = correlator_pairs(cfg);
    let times = cfg.time_grid.points();
    let ds = distances_of(&pairs);
    let per_real = exec.try_map(cfg.realizations(), |i| {
        let run = || -> Result<(Vec<f64>, Vec<f64>)> {
            let spec = cfg.realization(i)?;
            let (_, d) = freefermion::solve(&spec)?;
            Ok(realization_correlator(&d, &pairs, &times))
        };
        run().map_err(|e| e.with_replay(cfg.seed(), i))
    })?;

    let mut grid_t = Table::new(pairs.len());
    let mut eig_t = Table::new(pairs.len());
    let mut dist_grid = Table::new(ds.len());
    let mut dist_eig = Table::new(ds.len());
    for (g, e) in &per_real {
        grid_t.push_row(g);
        eig_t.push_row(e);
        dist_grid.push_row(&distance_averages(&pairs, &ds, g));
        dist_eig.push_row(&distance_averages(&pairs, &ds, e));
    }
    let rows: Vec<CorrelatorRow> = pairs
        .iter()
        .enumerate()
        .map(|(c, &(j, k))| CorrelatorRow {
            j,
            k,
            distance: k - j,
            grid_sup_mean: grid_t.cells()[c].mean(),
            eigencorr_mean: eig_t.cells()[c].mean(),
            stderr: grid_t.cells()[c].stderr(),
        })
        .collect();
    let by_distance: Vec<DistanceRow> = ds
        .iter()
        .enumerate()
        .map(|(i, &d)| DistanceRow {
            distance: d,
            pairs: pairs.iter().filter(|(j, k)| k - j == d).count(),
            grid_sup_mean: dist_grid.cells()[i].mean(),
            eigencorr_mean: dist_eig.cells()[i].mean(),
            stderr: dist_grid.cells()[i].stderr(),
        })
        .collect();
    let grid_pts: Vec<(usize, f64)> = by_distance.iter().map(|r| (r.distance, r.grid_sup_mean)).collect();
    let eig_pts: Vec<(usize, f64)> = by_distance.iter().map(|r| (r.distance, r.eigencorr_mean)).collect();
    let fit = fit_exponential(&grid_pts, &cfg.distance_window, cfg.min_r2)?;
    let eigencorr_fit = fit_exponential(&eig_pts, &cfg.distance_window, cfg.min_r2)?;
    let envelope = envelope_from(&rows, &eigencorr_fit);
    Ok(LocalizationReport {
        n: cfg.n(),
        realizations: cfg.realizations(),
        seed: cfg.seed(),
        method_tag: METHOD_TAG.to_string(),
        rows,
        by_distance,
        fit,
        eigencorr_fit,
        envelope,
    })
}
