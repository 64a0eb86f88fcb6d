use serde::{Deserialize, Serialize};

use super::{draw_realization, ChainSpec, DisorderSpec};
use crate::error::{Error, Result};

/// Largest chain the exact many-body oracle may be asked to build.
pub const ORACLE_CAP_LIMIT: usize = 14;

/// Uniform grid `0, step, 2 step, ..., <= t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn new(t_max: f64, step: f64) -> Result<Self> {
        let g = Self { t_max, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config(format!("time step must be positive, got {}", self.step)));
        }
        if !(self.t_max >= self.step && self.t_max.is_finite()) {
            return Err(Error::config(format!(
                "t_max = {} must be at least the step {}",
                self.t_max, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.t_max / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceWindow {
    pub d_min: usize,
    pub d_max: usize,
}

impl DistanceWindow {
    /// `[5, min(40, n - 10)]` for long chains, everything for short ones.
    pub fn default_for(n: usize) -> Self {
        if n >= 20 {
            Self {
                d_min: 5,
                d_max: 40.min(n - 10),
            }
        } else {
            Self {
                d_min: 1,
                d_max: n.saturating_sub(1).max(1),
            }
        }
    }

    pub fn contains(&self, d: usize) -> bool {
        d >= self.d_min && d <= self.d_max
    }

    pub fn len(&self) -> usize {
        (self.d_max + 1).saturating_sub(self.d_min)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything needed to run a disorder ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub chain_template: ChainSpec,
    pub disorder: DisorderSpec,
    /// Explicit field values; when set every realization uses them.
    pub fixed_nu: Option<Vec<f64>>,
    pub time_grid: TimeGrid,
    /// Grid used by exact-oracle sweeps, which cost far more per point.
    pub oracle_grid: TimeGrid,
    pub distance_window: DistanceWindow,
    pub oracle_cap: usize,
    /// Sites excluded at each chain end when sampling correlator pairs.
    pub edge: usize,
    /// Pairs sampled per distance; 0 takes every admissible pair.
    pub pairs_per_distance: usize,
    /// Minimum r^2 for a fit to count as exponential decay.
    pub min_r2: f64,
}

impl EnsembleConfig {
    pub fn new(chain_template: ChainSpec, disorder: DisorderSpec) -> Result<Self> {
        let n = chain_template.n();
        let cfg = Self {
            distance_window: DistanceWindow::default_for(n),
            chain_template,
            disorder,
            fixed_nu: None,
            time_grid: TimeGrid {
                t_max: 200.0,
                step: 0.1,
            },
            oracle_grid: TimeGrid {
                t_max: 20.0,
                step: 0.25,
            },
            oracle_cap: 10,
            edge: if n >= 20 { 5 } else { 0 },
            pairs_per_distance: 8,
            min_r2: 0.9,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.chain_template.n()
    }

    pub fn realizations(&self) -> usize {
        self.disorder.realizations
    }

    pub fn seed(&self) -> u64 {
        self.disorder.base_seed
    }

    pub fn validate(&self) -> Result<()> {
        self.disorder.validate()?;
        self.time_grid.validate()?;
        self.oracle_grid.validate()?;
        let n = self.n();
        let w = self.distance_window;
        if n >= 2 && (w.d_min < 1 || w.d_max >= n || w.d_min > w.d_max) {
            return Err(Error::config(format!(
                "distance window [{}, {}] must satisfy 1 <= d_min <= d_max < n = {n}",
                w.d_min, w.d_max
            )));
        }
        if self.oracle_cap > ORACLE_CAP_LIMIT {
            return Err(Error::config(format!(
                "oracle_cap = {} exceeds the limit of {ORACLE_CAP_LIMIT}",
                self.oracle_cap
            )));
        }
        if let Some(nu) = &self.fixed_nu {
            self.chain_template.with_nu(nu.clone())?;
        }
        if !(0.0..=1.0).contains(&self.min_r2) {
            return Err(Error::config("min_r2 must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Chain for realization `index`.
    pub fn realization(&self, index: usize) -> Result<ChainSpec> {
        match &self.fixed_nu {
            Some(nu) => {
                if index >= self.realizations() {
                    return Err(Error::config(format!("realization index {index} out of range")));
                }
                self.chain_template.with_nu(nu.clone())
            }
            None => draw_realization(&self.disorder, &self.chain_template, index),
        }
    }

    /// Copy with a different chain length; the window, edge and template
    /// couplings are rebuilt for the new size.
    pub fn resized(&self, n: usize) -> Result<Self> {
        let mu = self.chain_template.mu().first().copied().unwrap_or(1.0);
        let gamma = self.chain_template.gamma().first().copied().unwrap_or(0.0);
        let template = ChainSpec::uniform(mu, gamma, vec![0.0; n])?;
        let mut cfg = self.clone();
        cfg.chain_template = template;
        cfg.fixed_nu = None;
        cfg.distance_window = DistanceWindow {
            d_min: self.distance_window.d_min,
            d_max: self.distance_window.d_max.min(n.saturating_sub(1)),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
