//! Run configuration files.
//!
//! TOML with one table per module. The `[model]` table carries the chain and
//! ensemble keys (`n`, `mu`, `gamma`, `nu_family`, `nu_strength`, `seed`,
//! `realizations`, `t_max`, `t_step`, `d_min`, `d_max`, `oracle_cap`) plus an
//! optional explicit `nu` list. `[exact_oracle]` holds the (coarser) time grid
//! for many-body sweeps and `[localization]` the estimator settings.
//!
//! ```toml
//! [model]
//! n = 8
//! mu = 1.0
//! gamma = 0.0
//! nu_family = "uniform(0, 1)"
//! nu_strength = 4.0
//! seed = 7
//! realizations = 200
//!
//! [exact_oracle]
//! t_max = 20.0
//! t_step = 0.25
//!
//! [localization]
//! left = "a"
//! left_sites = [1]
//! right = "sigma_z"
//! right_sites = [3, 4, 5, 6, 7, 8]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    ChainSpec, DisorderFamily, DisorderSpec, DistanceWindow, EnsembleConfig, ObservableKind, ObservablePair,
    TimeGrid,
};
use crate::error::{Error, Result};

/// Left observable on `left_sites` probed against each right site in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub left: ObservableKind,
    pub left_sites: Vec<usize>,
    pub right: ObservableKind,
    pub right_sites: Vec<usize>,
}

impl ProbeConfig {
    pub fn pairs(&self) -> Vec<ObservablePair> {
        self.right_sites
            .iter()
            .map(|&k| ObservablePair::new(self.left_sites.clone(), k, self.left, self.right))
            .collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.right_sites.is_empty() {
            return Err(Error::config("probe needs at least one right site"));
        }
        self.pairs().iter().try_for_each(|p| p.validate(n))
    }

    fn default_for(n: usize) -> Self {
        Self {
            left: ObservableKind::A,
            left_sites: vec![1],
            right: ObservableKind::SigmaZ,
            right_sites: (3.min(n)..=n).filter(|&k| k > 1).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStatsConfig {
    pub epsilons: Vec<f64>,
    pub histogram_bins: usize,
}

impl GapStatsConfig {
    /// `epsilon * n` spaced evenly over `[0, 0.5]`.
    fn default_for(n: usize) -> Self {
        Self {
            epsilons: (0..=10).map(|i| 0.05 * i as f64 / n as f64).collect(),
            histogram_bins: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub ensemble: EnsembleConfig,
    pub probe: ProbeConfig,
    pub gapstats: GapStatsConfig,
    /// Grid spacing for small-time commutator profiles on `[0, 1]`.
    pub small_time_step: f64,
    /// Decay rate used by clustering checks instead of the ensemble fit.
    pub eta_override: Option<f64>,
}

impl RunConfig {
    pub fn from_ensemble(ensemble: EnsembleConfig) -> Self {
        let n = ensemble.n();
        Self {
            probe: ProbeConfig::default_for(n),
            gapstats: GapStatsConfig::default_for(n),
            small_time_step: 0.05,
            eta_override: None,
            ensemble,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        raw.resolve()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.ensemble.disorder.base_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        let n = self.ensemble.n();
        if n >= 2 {
            self.probe.validate(n)?;
        }
        if self.gapstats.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::config("gap-statistics epsilons must be non-negative"));
        }
        if self.gapstats.histogram_bins == 0 {
            return Err(Error::config("histogram_bins must be positive"));
        }
        if !(self.small_time_step > 0.0 && self.small_time_step <= 1.0) {
            return Err(Error::config("small_time_step must lie in (0, 1]"));
        }
        if let Some(eta) = self.eta_override {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::config("eta override must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    fn expand(self, len: usize, key: &str) -> Result<Vec<f64>> {
        match self {
            ScalarOrList::Scalar(x) => Ok(vec![x; len]),
            ScalarOrList::List(v) if v.len() == len => Ok(v),
            ScalarOrList::List(v) => Err(Error::config(format!(
                "`{key}` needs {len} values, got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    model: RawModel,
    #[serde(default)]
    exact_oracle: RawOracle,
    #[serde(default)]
    localization: RawLocalization,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n: usize,
    mu: Option<ScalarOrList>,
    gamma: Option<ScalarOrList>,
    nu: Option<Vec<f64>>,
    nu_family: Option<String>,
    nu_strength: Option<f64>,
    seed: Option<u64>,
    realizations: Option<usize>,
    t_max: Option<f64>,
    t_step: Option<f64>,
    d_min: Option<usize>,
    d_max: Option<usize>,
    oracle_cap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    t_max: Option<f64>,
    t_step: Option<f64>,
    small_time_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocalization {
    edge: Option<usize>,
    pairs_per_distance: Option<usize>,
    min_r2: Option<f64>,
    eta: Option<f64>,
    left: Option<String>,
    left_sites: Option<Vec<usize>>,
    right: Option<String>,
    right_sites: Option<Vec<usize>>,
    epsilons: Option<Vec<f64>>,
    histogram_bins: Option<usize>,
}

impl RawFile {
    fn resolve(self) -> Result<RunConfig> {
        let m = self.model;
        let n = m.n;
        if n == 0 {
            return Err(Error::config("n must be at least 1"));
        }
        let bonds = n - 1;
        let mu = m.mu.unwrap_or(ScalarOrList::Scalar(1.0)).expand(bonds, "mu")?;
        let gamma = m.gamma.unwrap_or(ScalarOrList::Scalar(0.0)).expand(bonds, "gamma")?;
        let template = ChainSpec::new(mu, gamma, vec![0.0; n])?;
        let family = match &m.nu_family {
            Some(text) => DisorderFamily::parse(text)?,
            None => DisorderFamily::UniformInterval { a: 0.0, b: 1.0 },
        };
        let disorder = DisorderSpec::new(
            family,
            m.nu_strength.unwrap_or(1.0),
            m.seed.unwrap_or(0),
            m.realizations.unwrap_or(1),
        )?;

        let mut ens = EnsembleConfig::new(template, disorder)?;
        ens.fixed_nu = m.nu;
        ens.time_grid = TimeGrid {
            t_max: m.t_max.unwrap_or(ens.time_grid.t_max),
            step: m.t_step.unwrap_or(ens.time_grid.step),
        };
        let o = self.exact_oracle;
        ens.oracle_grid = TimeGrid {
            t_max: o.t_max.unwrap_or(ens.oracle_grid.t_max),
            step: o.t_step.unwrap_or(ens.oracle_grid.step),
        };
        ens.distance_window = DistanceWindow {
            d_min: m.d_min.unwrap_or(ens.distance_window.d_min),
            d_max: m.d_max.unwrap_or(ens.distance_window.d_max),
        };
        if let Some(cap) = m.oracle_cap {
            ens.oracle_cap = cap;
        }
        let l = self.localization;
        if let Some(edge) = l.edge {
            ens.edge = edge;
        }
        if let Some(p) = l.pairs_per_distance {
            ens.pairs_per_distance = p;
        }
        if let Some(r2) = l.min_r2 {
            ens.min_r2 = r2;
        }

        let mut cfg = RunConfig::from_ensemble(ens);
        if let Some(s) = o.small_time_step {
            cfg.small_time_step = s;
        }
        cfg.eta_override = l.eta;
        if let Some(k) = l.left {
            cfg.probe.left = ObservableKind::parse(&k)?;
        }
        if let Some(s) = l.left_sites {
            cfg.probe.left_sites = s;
        }
        if let Some(k) = l.right {
            cfg.probe.right = ObservableKind::parse(&k)?;
        }
        if let Some(s) = l.right_sites {
            cfg.probe.right_sites = s;
        }
        if let Some(e) = l.epsilons {
            cfg.gapstats.epsilons = e;
        }
        if let Some(b) = l.histogram_bins {
            cfg.gapstats.histogram_bins = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let cfg = RunConfig::parse(
            r#"
            [model]
            n = 12
            mu = 1.0
            gamma = 0.25
            nu_family = "uniform(-1, 1)"
            nu_strength = 2.0
            seed = 11
            realizations = 5
            t_max = 10.0
            t_step = 0.5
            d_min = 2
            d_max = 6
            oracle_cap = 12
            "#,
        )
        .unwrap();
        let e = &cfg.ensemble;
        assert_eq!(e.n(), 12);
        assert_eq!(e.chain_template.gamma(), &[0.25; 11]);
        assert_eq!(e.disorder.family, DisorderFamily::UniformInterval { a: -1.0, b: 1.0 });
        assert_eq!(e.realizations(), 5);
        assert_eq!(e.time_grid.len(), 21);
        assert_eq!(e.distance_window, DistanceWindow { d_min: 2, d_max: 6 });
        assert_eq!(e.oracle_cap, 12);
    }

    #[test]
    fn fixed_field_and_probe() {
        let cfg = RunConfig::parse(
            r#"
            [model]
            n = 2
            nu = [0.0, 0.0]
            [localization]
            left = "c_dagger"
            right = "c"
            right_sites = [2]
            "#,
        );
        // A Jordan-Wigner fermion is not a local right observable.
        assert!(cfg.is_err());
        let cfg = RunConfig::parse("[model]\nn = 2\nnu = [0.0, 0.0]\n").unwrap();
        assert_eq!(cfg.ensemble.realization(0).unwrap().nu(), &[0.0, 0.0]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lengths() {
        assert!(RunConfig::parse("[model]\nn = 3\nfoo = 1\n").is_err());
        assert!(RunConfig::parse("[model]\nn = 3\nmu = [1.0]\n").is_err());
        assert!(RunConfig::parse("[model]\nn = 3\noracle_cap = 20\n").is_err());
    }
}
