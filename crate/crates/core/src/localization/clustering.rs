use serde::{Deserialize, Serialize};

use super::lr::{left_operator, oracle_context, right_operator};
use crate::error::{Error, Result};
use crate::exact_oracle::{ground_correlation, FrameOp};
use crate::freefermion::{ground_state_data, solve};
use crate::model::{EnsembleConfig, ObservablePair};
use crate::parallel::Executor;

/// Slack on the right side covering the grid estimate of `C(J,K)`.
pub const CLUSTERING_TOLERANCE: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Satisfied,
    /// `rhs < lhs <= 1.05 rhs`.
    WithinTolerance,
    Violated,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringRow {
    pub index: usize,
    /// Spectral gap `2 min |lambda_j|`.
    pub gamma: f64,
    pub distance: usize,
    pub c_jk: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub rhs: f64,
    pub lhs: f64,
    pub status: RowStatus,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub eta: f64,
    pub pair: ObservablePair,
    pub rows: Vec<ClusteringRow>,
}

impl ClusteringReport {
    pub fn evaluated(&self) -> usize {
        self.rows.iter().filter(|r| r.status != RowStatus::Skipped).count()
    }

    /// Fraction of evaluated rows with `lhs <= 1.05 rhs`.
    pub fn pass_fraction(&self) -> f64 {
        let ok = self
            .rows
            .iter()
            .filter(|r| matches!(r.status, RowStatus::Satisfied | RowStatus::WithinTolerance))
            .count();
        if self.evaluated() == 0 {
            0.0
        } else {
            ok as f64 / self.evaluated() as f64
        }
    }
}

/// `alpha = gamma^2 / (4 eta d)` and `lambda = sqrt(pi / alpha) / 2`.
pub fn clustering_parameters(gamma: f64, eta: f64, d: usize) -> (f64, f64) {
    let alpha = gamma * gamma / (4.0 * eta * d as f64);
    (alpha, 0.5 * (std::f64::consts::PI / alpha).sqrt())
}

/// `[1 + C/pi (2 - ln(gamma / sqrt(pi eta d)))] ||A|| ||B|| exp(-eta d)`.
pub fn clustering_rhs(c_jk: f64, eta: f64, d: usize, gamma: f64, norm_a: f64, norm_b: f64) -> f64 {
    let d = d as f64;
    let log = (gamma / (std::f64::consts::PI * eta * d).sqrt()).ln();
    (1.0 + c_jk / std::f64::consts::PI * (2.0 - log)) * norm_a * norm_b * (-eta * d).exp()
}

pub fn classify(lhs: f64, rhs: f64) -> RowStatus {
    if lhs <= rhs {
        RowStatus::Satisfied
    } else if lhs <= CLUSTERING_TOLERANCE * rhs {
        RowStatus::WithinTolerance
    } else {
        RowStatus::Violated
    }
}

fn skipped(index: usize, gamma: f64, d: usize, reason: String) -> ClusteringRow {
    ClusteringRow {
        index,
        gamma,
        distance: d,
        c_jk: f64::NAN,
        alpha: f64::NAN,
        lambda: f64::NAN,
        rhs: f64::NAN,
        lhs: f64::NAN,
        status: RowStatus::Skipped,
        reason: Some(reason),
    }
}

fn check_realization(cfg: &EnsembleConfig, pair: &ObservablePair, eta: f64, times: &[f64], index: usize) -> Result<ClusteringRow> {
    let spec = cfg.realization(index)?;
    let n = spec.n();
    let d = pair.distance();
    let (_, diag) = solve(&spec)?;
    let gs = ground_state_data(&diag)?;
    if gs.degenerate {
        return Ok(skipped(index, gs.gap, d, "degenerate free-fermion ground state".into()));
    }
    let a = left_operator(n, pair)?;
    let b = right_operator(n, pair)?;
    let ctx = oracle_context(&spec, cfg.oracle_cap, &[&a, &b])?;
    if ctx.is_degenerate() {
        return Ok(skipped(index, gs.gap, d, format!("degenerate oracle ground state (gap {:e})", ctx.gap())));
    }
    let (na, nb) = (a.norm(), b.norm());
    let fa = FrameOp::from_local(&ctx, &a)?;
    let fb = FrameOp::from_local(&ctx, &b)?;
    let mut c_jk = 0.0f64;
    for &t in times.iter().filter(|t| **t != 0.0) {
        let v = fa.evolve(&ctx, t).commutator(&fb)?.norm();
        c_jk = c_jk.max(v * (eta * d as f64).exp() / (t.abs().min(1.0) * na * nb));
    }
    let lhs = ground_correlation(&ctx, &a, &b)?.norm();
    let (alpha, lambda) = clustering_parameters(gs.gap, eta, d);
    let rhs = clustering_rhs(c_jk, eta, d, gs.gap, na, nb);
    Ok(ClusteringRow {
        index,
        gamma: gs.gap,
        distance: d,
        c_jk,
        alpha,
        lambda,
        rhs,
        lhs,
        status: classify(lhs, rhs),
        reason: None,
    })
}

/// Per-realization check of the clustering inequality with `B` replaced by
/// `B - <B>`; `C(J,K)` is the smallest constant making the zero-velocity
/// bound hold on the grid `times`.
pub fn clustering_check(cfg: &EnsembleConfig, pair: &ObservablePair, eta: f64, times: &[f64], exec: &Executor) -> Result<ClusteringReport> {
    cfg.validate()?;
    let n = cfg.n();
    pair.validate(n)?;
    if !cfg.chain_template.conserves_number() {
        return Err(Error::config("the clustering check needs an isotropic chain"));
    }
    if n > cfg.oracle_cap {
        return Err(Error::Capacity { n, cap: cfg.oracle_cap });
    }
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::NotLocalized { eta });
    }
    let rows = exec.try_map(cfg.realizations(), |i| {
        check_realization(cfg, pair, eta, times, i).map_err(|e| e.with_replay(cfg.seed(), i))
    })?;
    Ok(ClusteringReport {
        eta,
        pair: pair.clone(),
        rows,
    })
}
