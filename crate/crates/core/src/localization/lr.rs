use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dynloc::Envelope;
use super::stats::Table;
use crate::error::{Error, Result};
use crate::exact_oracle::{build_hamiltonian, EvolutionContext, FrameOp, LocalOp, SectorLayout, SectorRule};
use crate::model::{ChainSpec, EnsembleConfig, ObservablePair};
use crate::parallel::Executor;

/// `C' = 96 C / (1 - exp(-eta))^2`.
pub fn lr_constant(c: f64, eta: f64) -> Result<f64> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::NotLocalized { eta });
    }
    let q = 1.0 - (-eta).exp();
    Ok(96.0 * c / (q * q))
}

pub fn lr_constant_from_fit(envelope: &Envelope) -> Result<f64> {
    lr_constant(envelope.c, envelope.eta)
}

/// Small-time constant
/// `c = (4 C_hop C' (1 + e^eta) + 2 C_field C') / (1 - e^-eta)`
/// with `C_hop = max |mu|(1 + |gamma|)` and `C_field = max |nu|`.
pub fn small_time_constant(c_prime: f64, eta: f64, hop: f64, field: f64) -> f64 {
    (4.0 * hop * c_prime * (1.0 + eta.exp()) + 2.0 * field * c_prime) / (1.0 - (-eta).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pair: usize,
    pub right_site: usize,
    pub distance: usize,
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupRow {
    pub pair: usize,
    pub right_site: usize,
    pub distance: usize,
    /// Ensemble mean of the grid maximum of `||[tau_t(A), B]||`.
    pub sup_mean: f64,
    pub stderr: f64,
    pub norm_a: f64,
    pub norm_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorSweep {
    pub pairs: Vec<ObservablePair>,
    pub times: Vec<f64>,
    pub realizations: usize,
    pub rows: Vec<SweepRow>,
    pub sup_rows: Vec<SupRow>,
}

impl CommutatorSweep {
    /// Ensemble means for pair `p` along the time grid.
    pub fn profile(&self, p: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.pair == p).map(|r| r.mean).collect()
    }
}

pub fn left_operator(n: usize, pair: &ObservablePair) -> Result<LocalOp> {
    LocalOp::observable_product(n, pair.kind_left, &pair.left_sites)
}

pub fn right_operator(n: usize, pair: &ObservablePair) -> Result<LocalOp> {
    LocalOp::observable(n, pair.kind_right, pair.right_site)
}

/// Finest sector rule under which the chain and every operator are block
/// structured.
pub fn sector_rule_for(spec: &ChainSpec, ops: &[&LocalOp]) -> SectorRule {
    let n = spec.n();
    let fits = |rule| {
        let layout = SectorLayout::new(n, rule);
        ops.iter().all(|op| op.sector_map(&layout).is_some())
    };
    if spec.conserves_number() && fits(SectorRule::Number) {
        SectorRule::Number
    } else if fits(SectorRule::Parity) {
        SectorRule::Parity
    } else {
        SectorRule::Single
    }
}

pub fn oracle_context(spec: &ChainSpec, cap: usize, ops: &[&LocalOp]) -> Result<EvolutionContext> {
    let n = spec.n();
    if n > cap {
        return Err(Error::Capacity { n, cap });
    }
    let rule = sector_rule_for(spec, ops);
    if rule == crate::exact_oracle::natural_rule(spec) {
        build_hamiltonian(spec, cap)
    } else {
        EvolutionContext::with_rule(spec, cap, rule)
    }
}

/// `||[tau_t(A_p), B_p]||` on `times` for every pair, one realization.
pub fn realization_commutators(spec: &ChainSpec, cap: usize, pairs: &[ObservablePair], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = spec.n();
    let mut lefts: BTreeMap<(String, Vec<usize>), usize> = BTreeMap::new();
    let mut left_ops: Vec<LocalOp> = Vec::new();
    let mut left_of = Vec::with_capacity(pairs.len());
    for p in pairs {
        p.validate(n)?;
        let key = (p.kind_left.name(), p.left_sites.clone());
        let idx = match lefts.get(&key) {
            Some(&i) => i,
            None => {
                left_ops.push(left_operator(n, p)?);
                lefts.insert(key, left_ops.len() - 1);
                left_ops.len() - 1
            }
        };
        left_of.push(idx);
    }
    let right_ops: Vec<LocalOp> = pairs.iter().map(|p| right_operator(n, p)).collect::<Result<_>>()?;
    let all: Vec<&LocalOp> = left_ops.iter().chain(right_ops.iter()).collect();
    let ctx = oracle_context(spec, cap, &all)?;
    let left_frames: Vec<FrameOp> = left_ops.iter().map(|op| FrameOp::from_local(&ctx, op)).collect::<Result<_>>()?;
    let right_frames: Vec<FrameOp> = right_ops.iter().map(|op| FrameOp::from_local(&ctx, op)).collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; times.len()]; pairs.len()];
    for (ti, &t) in times.iter().enumerate() {
        let evolved: Vec<Option<FrameOp>> = left_frames
            .iter()
            .map(|f| if t == 0.0 { None } else { Some(f.evolve(&ctx, t)) })
            .collect();
        for (p, row) in out.iter_mut().enumerate() {
            let li = left_of[p];
            row[ti] = match &evolved[li] {
                None if left_ops[li].commutes_with(&right_ops[p]) => 0.0,
                None => left_frames[li].commutator(&right_frames[p])?.norm(),
                Some(at) => at.commutator(&right_frames[p])?.norm(),
            };
        }
    }
    Ok(out)
}

/// Ensemble means of `||[tau_t(A), B]||` per pair and time, and of its grid
/// maximum, from the exact oracle.
pub fn spin_commutator_sweep(cfg: &EnsembleConfig, pairs: &[ObservablePair], times: &[f64], exec: &Executor) -> Result<CommutatorSweep> {
    cfg.validate()?;
    let n = cfg.n();
    if n > cfg.oracle_cap {
        return Err(Error::Capacity { n, cap: cfg.oracle_cap });
    }
    for p in pairs {
        p.validate(n)?;
    }
    let per_real = exec.try_map(cfg.realizations(), |i| {
        let run = || realization_commutators(&cfg.realization(i)?, cfg.oracle_cap, pairs, times);
        run().map_err(|e| e.with_replay(cfg.seed(), i))
    })?;
    let width = pairs.len() * times.len();
    let mut table = Table::new(width);
    let mut sups = Table::new(pairs.len());
    for vals in &per_real {
        let flat: Vec<f64> = vals.iter().flatten().copied().collect();
        table.push_row(&flat);
        let s: Vec<f64> = vals.iter().map(|v| v.iter().copied().fold(0.0, f64::max)).collect();
        sups.push_row(&s);
    }
    let mut rows = Vec::with_capacity(width);
    for (p, pair) in pairs.iter().enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            let cell = &table.cells()[p * times.len() + ti];
            rows.push(SweepRow {
                pair: p,
                right_site: pair.right_site,
                distance: pair.distance(),
                t,
                mean: cell.mean(),
                stderr: cell.stderr(),
            });
        }
    }
    let sup_rows = pairs
        .iter()
        .enumerate()
        .map(|(p, pair)| -> Result<SupRow> {
            Ok(SupRow {
                pair: p,
                right_site: pair.right_site,
                distance: pair.distance(),
                sup_mean: sups.cells()[p].mean(),
                stderr: sups.cells()[p].stderr(),
                norm_a: left_operator(n, pair)?.norm(),
                norm_b: right_operator(n, pair)?.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommutatorSweep {
        pairs: pairs.to_vec(),
        times: times.to_vec(),
        realizations: cfg.realizations(),
        rows,
        sup_rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrBoundRow {
    pub right_site: usize,
    pub distance: usize,
    pub sup_mean: f64,
    /// `C' ||A|| ||B|| exp(-eta d)`.
    pub bound: f64,
    pub holds: bool,
}

/// Compare sweep maxima with `C' exp(-eta d)` from the propagator envelope.
pub fn lr_bound_rows(sweep: &CommutatorSweep, envelope: &Envelope) -> Result<(f64, Vec<LrBoundRow>)> {
    let c_prime = lr_constant_from_fit(envelope)?;
    let rows = sweep
        .sup_rows
        .iter()
        .map(|r| {
            let bound = c_prime * r.norm_a * r.norm_b * (-envelope.eta * r.distance as f64).exp();
            LrBoundRow {
                right_site: r.right_site,
                distance: r.distance,
                sup_mean: r.sup_mean,
                bound,
                holds: r.sup_mean <= bound,
            }
        })
        .collect();
    Ok((c_prime, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallTimeReport {
    pub times: Vec<f64>,
    pub means: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Smallest `s` with `mean(t) <= s |t|` on the grid.
    pub slope: f64,
    /// Least-squares slope through the origin.
    pub ls_slope: f64,
    /// `slope / (||A|| ||B|| exp(-eta d))`.
    pub normalized_slope: Option<f64>,
    /// Small-time constant `c`, when an envelope is available.
    pub theory_c: Option<f64>,
    pub zero_at_origin: bool,
}

/// Commutator growth near `t = 0` for one pair, on `times` within `[0, 1]`.
pub fn small_time_profile(
    cfg: &EnsembleConfig,
    pair: &ObservablePair,
    times: &[f64],
    envelope: Option<&Envelope>,
    exec: &Executor,
) -> Result<SmallTimeReport> {
    if times.iter().any(|t| !(0.0..=1.0).contains(&t.abs())) {
        return Err(Error::config("small-time grid must lie in |t| <= 1"));
    }
    let sweep = spin_commutator_sweep(cfg, std::slice::from_ref(pair), times, exec)?;
    let means = sweep.profile(0);
    let stderr: Vec<f64> = sweep.rows.iter().map(|r| r.stderr).collect();
    let slope = times
        .iter()
        .zip(&means)
        .filter(|(t, _)| **t != 0.0)
        .map(|(t, m)| m / t.abs())
        .fold(0.0, f64::max);
    let abs_t: Vec<f64> = times.iter().map(|t| t.abs()).collect();
    let ls_slope = super::fit::slope_through_origin(&abs_t, &means);
    let zero_at_origin = times.iter().zip(&means).filter(|(t, _)| **t == 0.0).all(|(_, m)| *m == 0.0);
    let sup = &sweep.sup_rows[0];
    let (normalized_slope, theory_c) = match envelope {
        Some(env) => {
            let scale = sup.norm_a * sup.norm_b * (-env.eta * sup.distance as f64).exp();
            let c_prime = lr_constant_from_fit(env)?;
            let (lo, hi) = cfg.disorder.field_range();
            let field = match &cfg.fixed_nu {
                Some(nu) => nu.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                None => lo.abs().max(hi.abs()),
            };
            let hop = cfg.chain_template.hopping_bound();
            (Some(slope / scale), Some(small_time_constant(c_prime, env.eta, hop, field)))
        }
        None => (None, None),
    };
    Ok(SmallTimeReport {
        times: times.to_vec(),
        means,
        stderr,
        slope,
        ls_slope,
        normalized_slope,
        theory_c,
        zero_at_origin,
    })
}
