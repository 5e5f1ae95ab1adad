//! One runner per experiment. Each returns the artifact files it produced
//! as `(name, contents)` pairs; nothing is written here.

use super::config::{ExperimentConfig, MomentMethod};
use super::output::{jsonl, num, opt_num, Csv};
use crate::error::Result;
use crate::extremes::{as_growth_experiment, extreme_trials, SampleMode};
use crate::moments::{brute_force_moment, exact_moment_integer_k, mc_moment, moment_envelope, weissler_check};
use crate::numtheory::FactorTable;
use crate::partial_sum::{trajectory, WeightSpec};
use crate::quadrature::QuadratureSpec;
use crate::rmf::RmfSample;
use crate::seeding::replica_seed;
use crate::tails::{small_range_v, tail_curve, tail_envelope_large, tail_envelope_small};
use crate::zetamodel::{parseval_residual, random_coefficients, sigma_t_clt_experiment};
use serde::Serialize;

pub type Artifacts = Vec<(String, String)>;

fn table_for(limit: u64) -> Result<FactorTable> {
    FactorTable::new(limit.max(2))
}

fn common_meta(cfg: &ExperimentConfig) -> Vec<(&'static str, String)> {
    vec![("kind", cfg.kind().to_string()), ("seed", cfg.seed().to_string())]
}

pub fn moments(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let ts = cfg.t_grid.clone().unwrap_or_default();
    let ks = cfg.k_grid.clone().unwrap_or_default();
    let method = cfg.method.unwrap_or(MomentMethod::Mc);
    let constants = cfg.envelope.unwrap_or_default();
    let table = table_for(if method == MomentMethod::Mc { *ts.iter().max().unwrap_or(&2) } else { 2 })?;
    let mut csv = Csv::new(
        "moments",
        &common_meta(cfg),
        &["kind", "T", "k", "method", "replicas", "mean", "stderr", "envelope_low", "envelope_high", "regime", "seed"],
    );
    for &t in &ts {
        for &k in &ks {
            let (replicas, mean, stderr) = match method {
                MomentMethod::Mc => {
                    let r = cfg.replicas.unwrap_or(2);
                    let e = mc_moment(cfg.kind(), t, k, &WeightSpec::default(), r, cfg.seed(), cfg.width(), &table)?;
                    (r, e.mean, e.stderr)
                }
                MomentMethod::Exact => (0, exact_moment_integer_k(t, k as u32)?, 0.0),
                MomentMethod::Brute => (0, brute_force_moment(t, k as u32)?, 0.0),
            };
            let band = moment_envelope(t as f64, k, &constants).ok();
            csv.row([
                cfg.kind().to_string(),
                t.to_string(),
                num(k),
                method.to_string(),
                replicas.to_string(),
                num(mean),
                num(stderr),
                opt_num(band.map(|b| b.log_lower.exp())),
                opt_num(band.map(|b| b.log_upper.exp())),
                band.map(|b| b.regime.to_string()).unwrap_or_default(),
                cfg.seed().to_string(),
            ]);
        }
    }
    Ok(vec![("moments.csv".into(), csv.into_string())])
}

pub fn tails(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let t = cfg.t.unwrap_or(1);
    let grid = cfg.v_grid.clone().unwrap_or_default();
    let replicas = cfg.replicas.unwrap_or(0);
    let table = table_for(t)?;
    let curve = tail_curve(cfg.kind(), t, &grid, replicas, cfg.seed(), cfg.width(), &table)?;
    let mut csv = Csv::new(
        "tails",
        &common_meta(cfg),
        &["T", "V", "phi_hat", "ci_low", "ci_high", "envelope_large", "envelope_small", "replicas", "seed"],
    );
    let tf = t as f64;
    for (i, &v) in grid.iter().enumerate() {
        let large = tail_envelope_large(tf, v).ok();
        let small = (t >= 16 && v >= 0.0).then(|| tail_envelope_small(v / small_range_v(tf, 1.0)));
        csv.row([
            t.to_string(),
            num(v),
            num(curve.phi_hat[i]),
            num(curve.ci_low[i]),
            num(curve.ci_high[i]),
            opt_num(large),
            opt_num(small),
            replicas.to_string(),
            cfg.seed().to_string(),
        ]);
    }
    Ok(vec![("tails.csv".into(), csv.into_string())])
}

/// Threshold levels reported for every extremes trial.
pub const EXTREME_EPS_LEVELS: [f64; 4] = [-0.2, 0.0, 0.2, 0.5];

pub fn extremes(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let t = cfg.t.unwrap_or(16);
    let mode = cfg.mode.unwrap_or(SampleMode::Full);
    let table = table_for(t)?;
    let trials = extreme_trials(
        cfg.kind(),
        t,
        mode,
        cfg.trials.unwrap_or(1),
        cfg.seed(),
        cfg.eps.unwrap_or(0.5),
        cfg.full_mode_max_t.unwrap_or(crate::extremes::FULL_MODE_MAX_T),
        cfg.width(),
        &table,
    )?;
    let mut columns = vec!["mode", "T", "N", "trial_seed", "max_abs", "log_max", "argmax_replica"];
    let names: Vec<(String, String)> = EXTREME_EPS_LEVELS
        .iter()
        .map(|e| (format!("threshold_{e}"), format!("below_{e}")))
        .collect();
    columns.extend(names.iter().map(|n| n.0.as_str()));
    columns.extend(names.iter().map(|n| n.1.as_str()));
    let mut meta = common_meta(cfg);
    meta.push(("mode", mode.to_string()));
    let mut csv = Csv::new("extremes", &meta, &columns);
    for tr in &trials {
        let thresholds: Vec<f64> =
            EXTREME_EPS_LEVELS.iter().map(|&e| mode.threshold(t, e)).collect::<Result<_>>()?;
        let mut row = vec![
            mode.to_string(),
            t.to_string(),
            tr.n.to_string(),
            tr.trial_seed.to_string(),
            num(tr.max_abs),
            num(tr.max_abs.ln()),
            tr.argmax_replica.to_string(),
        ];
        row.extend(thresholds.iter().map(|&h| num(h)));
        row.extend(thresholds.iter().map(|&h| (tr.max_abs <= h).to_string()));
        csv.row(row);
    }
    Ok(vec![("extremes.csv".into(), csv.into_string())])
}

pub fn trajectory_run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let t_max = cfg.t_max.unwrap_or(16);
    let grid = cfg.t_grid.clone().unwrap_or_default();
    let replicas = cfg.replicas.unwrap_or(1);
    let (eps, l) = (cfg.eps.unwrap_or(0.25), cfg.l.unwrap_or(1.0));
    let table = table_for(t_max)?;
    let seeds: Vec<u64> = (0..replicas).map(|i| replica_seed(cfg.seed(), i)).collect();

    let mut traj = Csv::new(
        "trajectory",
        &common_meta(cfg),
        &["replica", "replica_seed", "T", "re", "im", "abs", "block_max"],
    );
    let paths = crate::parallel::map_slice(cfg.width(), &seeds, |&s| {
        let sample = RmfSample::new(cfg.kind(), t_max.max(grid.last().copied().unwrap_or(2)), s, &table)?;
        trajectory(&sample, &grid, &WeightSpec::default(), &table, true)
    })?;
    for (i, path) in paths.iter().enumerate() {
        for (j, (&t, z)) in path.checkpoints.iter().zip(&path.values).enumerate() {
            let block = if j == 0 { String::new() } else { num(path.block_maxima[j - 1]) };
            traj.row([i.to_string(), path.seed.to_string(), t.to_string(), num(z.re), num(z.im), num(z.norm()), block]);
        }
    }

    let rows = as_growth_experiment(cfg.kind(), &seeds, t_max, eps, l, cfg.width(), &table)?;
    let mut meta = common_meta(cfg);
    meta.push(("t_max", t_max.to_string()));
    meta.push(("eps", num(eps)));
    meta.push(("L", num(l)));
    let mut growth = Csv::new(
        "growth",
        &meta,
        &["replica", "replica_seed", "upper_stat", "upper_argmax", "lower_stat", "lower_argmax"],
    );
    let mut blocks = Csv::new("growth_blocks", &meta, &["replica", "replica_seed", "block_start", "block_end", "max_abs"]);
    for (i, r) in rows.iter().enumerate() {
        growth.row([
            i.to_string(),
            r.seed.to_string(),
            num(r.upper_stat),
            r.upper_argmax.to_string(),
            num(r.lower_stat),
            r.lower_argmax.to_string(),
        ]);
        for b in &r.blocks {
            blocks.row([i.to_string(), r.seed.to_string(), b.start.to_string(), b.end.to_string(), num(b.max_abs)]);
        }
    }
    Ok(vec![
        ("trajectory.csv".into(), traj.into_string()),
        ("growth.csv".into(), growth.into_string()),
        ("growth_blocks.csv".into(), blocks.into_string()),
    ])
}

pub fn weissler(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let t = cfg.t.unwrap_or(1);
    let table = table_for(t)?;
    let (p, q, rho) = (cfg.p.unwrap_or(2.0), cfg.q.unwrap_or(4.0), cfg.rho.unwrap_or(0.0));
    let replicas = cfg.replicas.unwrap_or(2);
    let r = weissler_check(cfg.kind(), t, p, q, rho, &WeightSpec::default(), replicas, cfg.seed(), cfg.width(), &table)?;
    let mut csv = Csv::new(
        "weissler",
        &common_meta(cfg),
        &["T", "p", "q", "rho", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "satisfied_with_margin", "replicas", "seed"],
    );
    csv.row([
        t.to_string(),
        num(p),
        num(q),
        num(rho),
        num(r.lhs),
        num(r.lhs_stderr),
        num(r.rhs),
        num(r.rhs_stderr),
        r.satisfied_with_margin.to_string(),
        replicas.to_string(),
        cfg.seed().to_string(),
    ]);
    Ok(vec![("weissler.csv".into(), csv.into_string())])
}

#[derive(Serialize)]
struct ParsevalLine {
    support: u64,
    sigma: f64,
    lhs: f64,
    rhs: f64,
    residual: f64,
}

pub fn parseval(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let quad = QuadratureSpec::default();
    let mut lines = Vec::new();
    for &size in cfg.support_sizes.as_deref().unwrap_or_default() {
        let coeffs = random_coefficients(cfg.seed(), size);
        for &sigma in cfg.sigma_grid.as_deref().unwrap_or_default() {
            let r = parseval_residual(&coeffs, sigma, &quad)?;
            lines.push(ParsevalLine { support: size, sigma, lhs: r.lhs, rhs: r.rhs, residual: r.residual });
        }
    }
    Ok(vec![("parseval.jsonl".into(), jsonl(&lines)?)])
}

pub fn sigma_t(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let t = cfg.t.unwrap_or(16);
    let table = table_for(t)?;
    let replicas = cfg.replicas.unwrap_or(2);
    let report = sigma_t_clt_experiment(t, replicas, cfg.seed(), cfg.width(), &table)?;
    let sd = report.predicted_var.sqrt();
    let mut csv = Csv::new("sigma_t", &common_meta(cfg), &["T", "replica", "value", "normalized"]);
    for (i, v) in report.values.iter().enumerate() {
        csv.row([t.to_string(), i.to_string(), num(*v), num(v / sd)]);
    }
    #[derive(Serialize)]
    struct Summary {
        t: u64,
        replicas: u64,
        seed: u64,
        sample_mean: f64,
        sample_var: f64,
        predicted_var: f64,
        half_log_log_t: f64,
        ks_statistic: f64,
        ks_critical_1pct: f64,
    }
    let summary = Summary {
        t,
        replicas,
        seed: cfg.seed(),
        sample_mean: report.sample_mean,
        sample_var: report.sample_var,
        predicted_var: report.predicted_var,
        half_log_log_t: 0.5 * (t as f64).ln().ln(),
        ks_statistic: report.ks_statistic,
        ks_critical_1pct: 1.63 / (replicas as f64).sqrt(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| crate::Error::Invariant(e.to_string()))?;
    Ok(vec![("sigma_t.csv".into(), csv.into_string()), ("sigma_t_summary.json".into(), json + "\n")])
}
