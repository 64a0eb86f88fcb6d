//! Command orchestration: run an ensemble command, write CSV and JSON
//! artifacts, and record them in `manifest.json`.

mod output;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use output::{fmt_f64, sha256_hex, Artifact, OutputDir};
pub use verify::{
    anticommutator_residual, car_residual, free_fermion_spectrum, gap_residual, kernel_identity_residual,
    propagator_expansion_residual, spectrum_residual, verify_suite, Tamper, VerifyCheck, VerifyReport, CAR_TOL,
    CHECK_TIMES, EQUIVALENCE_TOL, KERNEL_TOL, STRUCTURE_TOL, UNITARITY_TOL,
};

use crate::error::{Error, Result};
use crate::freefermion::solve;
use crate::localization::{
    clustering_check, correlation_decay_sweep, dynloc_correlator, lr_bound_rows, lr_constant_from_fit,
    small_time_profile, spin_commutator_sweep, wegner_gap_stats, DecayRow, Envelope, ExpFit, LocalizationReport,
};
use crate::model::{DistanceWindow, RunConfig};
use crate::parallel::Executor;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Diagonalize,
    Dynloc,
    Lr,
    Cluster,
    GapStats,
    Correlations,
    Verify,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Diagonalize,
        Command::Dynloc,
        Command::Lr,
        Command::Cluster,
        Command::GapStats,
        Command::Correlations,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Diagonalize => "diagonalize",
            Command::Dynloc => "dynloc",
            Command::Lr => "lr",
            Command::Cluster => "cluster",
            Command::GapStats => "gap-stats",
            Command::Correlations => "correlations",
            Command::Verify => "verify",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Command::GapStats => "gap_stats",
            other => other.name(),
        }
    }
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::SiteOutOfRange { .. } | Error::Capacity { .. } | Error::Io(_) => 1,
        Error::Numerical { .. } | Error::Degenerate { .. } | Error::Fit(_) | Error::NotLocalized { .. } => 2,
    }
}

pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub config: RunConfig,
    pub output_dir: PathBuf,
    pub worker_count: usize,
    pub started: String,
    pub finished: String,
    pub artifacts: Vec<Artifact>,
}

/// Result of one command.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub command: Command,
    pub summary: Value,
    pub artifacts: Vec<Artifact>,
    /// Human-readable report lines.
    pub lines: Vec<String>,
    /// Set by `verify` when a check fails.
    pub failed: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed {
            EXIT_VERIFY_FAILED
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config_path: Option<PathBuf>,
    /// Damage injected into `verify`; a negative control.
    pub tamper: Option<Tamper>,
}

/// Run `command` and append its entry to the manifest in `out`.
pub fn run(command: Command, cfg: &RunConfig, out: &Path, exec: &Executor, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = chrono::Utc::now().to_rfc3339();
    let mut dir = OutputDir::create(out)?;
    let (summary, lines, failed) = match command {
        Command::Diagonalize => cmd_diagonalize(cfg, &mut dir, exec)?,
        Command::Dynloc => cmd_dynloc(cfg, &mut dir, exec)?,
        Command::Lr => cmd_lr(cfg, &mut dir, exec)?,
        Command::Cluster => cmd_cluster(cfg, &mut dir, exec)?,
        Command::GapStats => cmd_gapstats(cfg, &mut dir, exec)?,
        Command::Correlations => cmd_correlations(cfg, &mut dir, exec)?,
        Command::Verify => cmd_verify(cfg, &mut dir, exec, opts.tamper.unwrap_or(Tamper::None))?,
    };
    let artifacts = dir.into_artifacts();
    let entry = RunManifest {
        command,
        config_path: opts.config_path.clone(),
        config: cfg.clone(),
        output_dir: out.to_path_buf(),
        worker_count: exec.workers(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        artifacts: artifacts.clone(),
    };
    append_manifest(out, entry)?;
    Ok(RunOutcome {
        command,
        summary,
        artifacts,
        lines,
        failed,
    })
}

pub fn read_manifest(out: &Path) -> Result<Vec<RunManifest>> {
    let path = out.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

fn append_manifest(out: &Path, entry: RunManifest) -> Result<()> {
    let mut runs = read_manifest(out)?;
    runs.push(entry);
    let mut text = serde_json::to_string_pretty(&runs).map_err(|e| Error::config(e.to_string()))?;
    text.push('\n');
    fs::write(out.join(MANIFEST_FILE), text)?;
    Ok(())
}

fn file(command: Command, stem: &str, ext: &str) -> String {
    format!("{}_{stem}.{ext}", command.prefix())
}

fn window_json(w: &DistanceWindow) -> Value {
    json!([w.d_min, w.d_max])
}

fn fit_json(f: &ExpFit) -> Value {
    json!({
        "C": f.c,
        "eta": f.eta,
        "r2": f.r2,
        "power_law_r2": f.power_r2,
        "window": [f.d_min, f.d_max],
        "exponential": f.exponential,
    })
}

type CmdResult = Result<(Value, Vec<String>, bool)>;

fn cmd_diagonalize(cfg: &RunConfig, dir: &mut OutputDir, exec: &Executor) -> CmdResult {
    let ens = &cfg.ensemble;
    let n = ens.n();
    let rows = exec.try_map(ens.realizations(), |i| {
        let run = || -> Result<Vec<String>> {
            let spec = ens.realization(i)?;
            let (_, d) = solve(&spec)?;
            let e0 = -d.lambda.iter().map(|l| l.abs()).sum::<f64>();
            let gap = 2.0 * d.lambda.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
            let mut row = vec![i.to_string(), d.path.tag().to_string(), fmt_f64(e0), fmt_f64(gap)];
            row.extend(d.lambda.iter().map(|&l| fmt_f64(l)));
            Ok(row)
        };
        run().map_err(|e| e.with_replay(ens.seed(), i))
    })?;
    let lambda_cols: Vec<String> = (1..=n).map(|j| format!("lambda_{j}")).collect();
    let mut header = vec!["realization", "path", "e0", "gap"];
    header.extend(lambda_cols.iter().map(String::as_str));
    dir.write_csv(&file(Command::Diagonalize, "spectra", "csv"), &header, &rows)?;
    let summary = json!({
        "n": n,
        "realizations": ens.realizations(),
        "seed": ens.seed(),
    });
    dir.write_json(&file(Command::Diagonalize, "summary", "json"), &summary)?;
    Ok((summary, vec![format!("diagonalized {} realizations (n = {n})", rows.len())], false))
}

fn write_dynloc(rep: &LocalizationReport, dir: &mut OutputDir, cmd: Command) -> Result<()> {
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.j.to_string(),
                r.k.to_string(),
                r.distance.to_string(),
                fmt_f64(r.grid_sup_mean),
                fmt_f64(r.eigencorr_mean),
                fmt_f64(r.stderr),
            ]
        })
        .collect();
    dir.write_csv(
        &file(cmd, "correlator", "csv"),
        &["j", "k", "distance", "grid_sup_mean", "eigencorr_mean", "stderr"],
        &rows,
    )?;
    let rows: Vec<Vec<String>> = rep
        .by_distance
        .iter()
        .map(|r| {
            vec![
                r.distance.to_string(),
                r.pairs.to_string(),
                fmt_f64(r.grid_sup_mean),
                fmt_f64(r.eigencorr_mean),
                fmt_f64(r.stderr),
            ]
        })
        .collect();
    dir.write_csv(
        &file(cmd, "by_distance", "csv"),
        &["distance", "pairs", "grid_sup_mean", "eigencorr_mean", "stderr"],
        &rows,
    )
}

fn c_prime_of(env: Option<&Envelope>) -> Option<f64> {
    env.and_then(|e| lr_constant_from_fit(e).ok())
}

fn dynloc_summary(cfg: &RunConfig, rep: &LocalizationReport) -> Value {
    let env = rep.envelope.as_ref();
    json!({
        "C": rep.fit.c,
        "eta": rep.fit.eta,
        "r2": rep.fit.r2,
        "C_prime": c_prime_of(env),
        "window": window_json(&cfg.ensemble.distance_window),
        "realizations": rep.realizations,
        "seed": rep.seed,
        "n": rep.n,
        "localized": rep.localized(),
        "method": rep.method_tag,
        "grid_fit": fit_json(&rep.fit),
        "eigencorrelator_fit": fit_json(&rep.eigencorr_fit),
        "envelope": env.map(|e| json!({"C": e.c, "eta": e.eta})),
    })
}

fn cmd_dynloc(cfg: &RunConfig, dir: &mut OutputDir, exec: &Executor) -> CmdResult {
    let rep = dynloc_correlator(&cfg.ensemble, exec)?;
    write_dynloc(&rep, dir, Command::Dynloc)?;
    let summary = dynloc_summary(cfg, &rep);
    dir.write_json(&file(Command::Dynloc, "summary", "json"), &summary)?;
    let line = if rep.localized() {
        format!("localized: C = {:.6e}, eta = {:.6}, r2 = {:.4}", rep.fit.c, rep.fit.eta, rep.fit.r2)
    } else {
        format!("not localized: eta = {:.6}, r2 = {:.4}", rep.fit.eta, rep.fit.r2)
    };
    Ok((summary, vec![line], false))
}

fn small_time_grid(step: f64) -> Vec<f64> {
    let count = (1.0 / step + 1e-9).floor() as usize;
    (0..=count).map(|i| i as f64 * step).collect()
}

fn cmd_lr(cfg: &RunConfig, dir: &mut OutputDir, exec: &Executor) -> CmdResult {
    let ens = &cfg.ensemble;
    let pairs = cfg.probe.pairs();
    let times = ens.oracle_grid.points();
    let loc = dynloc_correlator(ens, exec)?;
    let sweep = spin_commutator_sweep(ens, &pairs, &times, exec)?;
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.right_site.to_string(),
                r.distance.to_string(),
                fmt_f64(r.t),
                fmt_f64(r.mean),
                fmt_f64(r.stderr),
            ]
        })
        .collect();
    dir.write_csv(&file(Command::Lr, "commutators", "csv"), &["right_site", "distance", "t", "mean", "stderr"], &rows)?;

    let env = loc.envelope;
    let mut lines = Vec::new();
    let bound = match &env {
        Some(e) => Some(lr_bound_rows(&sweep, e)?),
        None => {
            lines.push("no positive decay rate: bound not evaluated".to_string());
            None
        }
    };
    let rows: Vec<Vec<String>> = sweep
        .sup_rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (b, holds) = match &bound {
                Some((_, rows)) => (fmt_f64(rows[i].bound), rows[i].holds.to_string()),
                None => ("NaN".to_string(), String::new()),
            };
            vec![r.right_site.to_string(), r.distance.to_string(), fmt_f64(r.sup_mean), fmt_f64(r.stderr), b, holds]
        })
        .collect();
    dir.write_csv(
        &file(Command::Lr, "bound", "csv"),
        &["right_site", "distance", "sup_mean", "stderr", "bound", "holds"],
        &rows,
    )?;

    let st_times = small_time_grid(cfg.small_time_step);
    let st = small_time_profile(ens, &pairs[0], &st_times, env.as_ref(), exec)?;
    let rows: Vec<Vec<String>> = st
        .times
        .iter()
        .zip(&st.means)
        .zip(&st.stderr)
        .map(|((t, m), s)| vec![fmt_f64(*t), fmt_f64(*m), fmt_f64(*s)])
        .collect();
    dir.write_csv(&file(Command::Lr, "small_time", "csv"), &["t", "mean", "stderr"], &rows)?;

    let all_hold = bound.as_ref().map(|(_, r)| r.iter().all(|x| x.holds));
    if let Some((cp, _)) = &bound {
        lines.push(format!("C' = {cp:.6e}; bound holds at every distance: {}", all_hold.unwrap_or(false)));
    }
    lines.push(format!("small-time slope = {:.6e}, zero at t = 0: {}", st.slope, st.zero_at_origin));
    let summary = json!({
        "C": env.as_ref().map(|e| e.c),
        "eta": env.as_ref().map(|e| e.eta),
        "r2": loc.eigencorr_fit.r2,
        "C_prime": bound.as_ref().map(|(c, _)| *c),
        "window": window_json(&ens.distance_window),
        "realizations": ens.realizations(),
        "seed": ens.seed(),
        "bound_holds": all_hold,
        "small_time": {
            "slope": st.slope,
            "ls_slope": st.ls_slope,
            "normalized_slope": st.normalized_slope,
            "theory_c": st.theory_c,
            "zero_at_origin": st.zero_at_origin,
        },
    });
    dir.write_json(&file(Command::Lr, "summary", "json"), &summary)?;
    Ok((summary, lines, false))
}

fn cmd_cluster(cfg: &RunConfig, dir: &mut OutputDir, exec: &Executor) -> CmdResult {
    let ens = &cfg.ensemble;
    let (eta, source) = match cfg.eta_override {
        Some(eta) => (eta, "override"),
        None => {
            let loc = dynloc_correlator(ens, exec)?;
            match loc.envelope {
                Some(e) => (e.eta, "eigencorrelator_fit"),
                None => return Err(Error::NotLocalized { eta: loc.eigencorr_fit.eta }),
            }
        }
    };
    let times = ens.oracle_grid.points();
    let mut rows = Vec::new();
    let mut per_pair = Vec::new();
    let mut lines = Vec::new();
    for (p, pair) in cfg.probe.pairs().iter().enumerate() {
        let rep = clustering_check(ens, pair, eta, &times, exec)?;
        for r in &rep.rows {
            rows.push(vec![
                p.to_string(),
                pair.right_site.to_string(),
                r.index.to_string(),
                fmt_f64(r.gamma),
                r.distance.to_string(),
                fmt_f64(r.c_jk),
                fmt_f64(r.alpha),
                fmt_f64(r.lambda),
                fmt_f64(r.rhs),
                fmt_f64(r.lhs),
                serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                r.reason.clone().unwrap_or_default(),
            ]);
        }
        lines.push(format!(
            "pair {p} (right site {}): {:.1}% of {} evaluated rows within tolerance",
            pair.right_site,
            100.0 * rep.pass_fraction(),
            rep.evaluated()
        ));
        per_pair.push(json!({
            "right_site": pair.right_site,
            "evaluated": rep.evaluated(),
            "skipped": rep.rows.len() - rep.evaluated(),
            "pass_fraction": rep.pass_fraction(),
        }));
    }
    dir.write_csv(
        &file(Command::Cluster, "rows", "csv"),
        &["pair", "right_site", "realization", "gamma", "distance", "c_jk", "alpha", "lambda", "rhs", "lhs", "status", "reason"],
        &rows,
    )?;
    let summary = json!({
        "eta": eta,
        "eta_source": source,
        "window": window_json(&ens.distance_window),
        "realizations": ens.realizations(),
        "seed": ens.seed(),
        "pairs": per_pair,
    });
    dir.write_json(&file(Command::Cluster, "summary", "json"), &summary)?;
    Ok((summary, lines, false))
}

fn cmd_gapstats(cfg: &RunConfig, dir: &mut OutputDir, exec: &Executor) -> CmdResult {
    let ens = &cfg.ensemble;
    let rep = wegner_gap_stats(ens, &cfg.gapstats.epsilons, cfg.gapstats.histogram_bins, exec)?;
    let n = rep.n as f64;
    let rows: Vec<Vec<String>> = rep
        .epsilon_grid
        .iter()
        .zip(&rep.empirical_prob)
        .map(|(e, p)| vec![fmt_f64(*e), fmt_f64(e * n), fmt_f64(*p)])
        .collect();
    dir.write_csv(&file(Command::GapStats, "probability", "csv"), &["epsilon", "epsilon_n", "probability"], &rows)?;
    let rows: Vec<Vec<String>> = rep
        .gap_histogram
        .iter()
        .map(|b| vec![fmt_f64(b.lo), fmt_f64(b.hi), b.count.to_string()])
        .collect();
    dir.write_csv(&file(Command::GapStats, "histogram", "csv"), &["gap_lo", "gap_hi", "count"], &rows)?;
    let summary = json!({
        "n": rep.n,
        "realizations": rep.realizations,
        "seed": ens.seed(),
        "slope": rep.slope_estimate,
    });
    dir.write_json(&file(Command::GapStats, "summary", "json"), &summary)?;
    Ok((summary, vec![format!("probability slope in eps*n: {:.6e}", rep.slope_estimate)], false))
}

fn decay_rows(rows: &[DecayRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| vec![r.distance.to_string(), r.pairs.to_string(), fmt_f64(r.mean), fmt_f64(r.stderr)])
        .collect()
}

fn cmd_correlations(cfg: &RunConfig, dir: &mut OutputDir, exec: &Executor) -> CmdResult {
    let ens = &cfg.ensemble;
    let rep = correlation_decay_sweep(ens, exec)?;
    let header = ["distance", "pairs", "mean", "stderr"];
    dir.write_csv(&file(Command::Correlations, "two_point", "csv"), &header, &decay_rows(&rep.two_point))?;
    if let Some(spin) = &rep.spin {
        dir.write_csv(&file(Command::Correlations, "spin", "csv"), &header, &decay_rows(spin))?;
    }
    let summary = json!({
        "C": rep.fit.c,
        "eta": rep.fit.eta,
        "r2": rep.fit.r2,
        "exponential": rep.fit.exponential,
        "window": window_json(&ens.distance_window),
        "realizations": rep.realizations,
        "skipped": rep.skipped,
        "seed": ens.seed(),
        "spin_fit": rep.spin_fit.as_ref().map(fit_json),
    });
    dir.write_json(&file(Command::Correlations, "summary", "json"), &summary)?;
    let line = format!(
        "two-point decay: eta' = {:.6}, r2 = {:.4}, exponential: {}",
        rep.fit.eta, rep.fit.r2, rep.fit.exponential
    );
    Ok((summary, vec![line], false))
}

fn cmd_verify(cfg: &RunConfig, dir: &mut OutputDir, exec: &Executor, tamper: Tamper) -> CmdResult {
    let rep = verify_suite(&cfg.ensemble, exec, tamper)?;
    let rows: Vec<Vec<String>> = rep
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.realization.map(|i| i.to_string()).unwrap_or_default(),
                c.seed.to_string(),
                fmt_f64(c.residual),
                fmt_f64(c.tolerance),
                c.passed.to_string(),
            ]
        })
        .collect();
    dir.write_csv(
        &file(Command::Verify, "checks", "csv"),
        &["check", "realization", "seed", "residual", "tolerance", "passed"],
        &rows,
    )?;
    let mut names: Vec<&str> = rep.checks.iter().map(|c| c.name.as_str()).collect();
    names.dedup();
    let mut seen = Vec::new();
    let mut lines = Vec::new();
    let mut maxima = serde_json::Map::new();
    for name in names {
        if seen.contains(&name) {
            continue;
        }
        seen.push(name);
        let worst = rep.max_residual(name).unwrap_or(0.0);
        let ok = rep.checks.iter().filter(|c| c.name == name).all(|c| c.passed);
        lines.push(format!("{} {name}: max residual {worst:.3e}", if ok { "PASS" } else { "FAIL" }));
        maxima.insert(name.to_string(), json!(worst));
    }
    for f in rep.failures() {
        lines.push(format!(
            "failed {}: realization {}, seed {}, residual {:.3e} > {:.1e}",
            f.name,
            f.realization.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
            f.seed,
            f.residual,
            f.tolerance
        ));
    }
    let summary = json!({
        "n": rep.n,
        "oracle_n": rep.oracle_n,
        "realizations": cfg.ensemble.realizations(),
        "seed": cfg.ensemble.seed(),
        "passed": rep.passed(),
        "max_residuals": maxima,
    });
    dir.write_json(&file(Command::Verify, "summary", "json"), &summary)?;
    Ok((summary, lines, !rep.passed()))
}
