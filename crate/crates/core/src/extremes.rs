//! Maxima of independent copies of `|M_f(T)|` and almost-sure growth
//! statistics along single realisations.

use crate::error::{domain, Error, Result};
use crate::numtheory::FactorTable;
use crate::parallel::map_indexed;
use crate::partial_sum::{lower_normalizer, partial_sum, prefix_sums, upper_normalizer, WeightSpec};
use crate::rmf::{RmfKind, RmfSample};
use crate::seeding::{replica_seed, trial_seed};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Default largest `T` for full-mode trials.
pub const FULL_MODE_MAX_T: u64 = 10_000;

/// Smallest `T` entering the growth statistics.
pub const GROWTH_MIN_T: u64 = 16;

/// `exp(√((½ + ε) log T log log T))`.
pub fn fgh_threshold(t: f64, eps: f64) -> Result<f64> {
    if !(t > std::f64::consts::E) {
        return domain(format!("fgh threshold needs T > e, got {t}"));
    }
    if !(eps > -0.5) {
        return domain(format!("fgh threshold needs eps > -1/2, got {eps}"));
    }
    Ok(((0.5 + eps) * t.ln() * t.ln().ln()).sqrt().exp())
}

/// `(1 + ε) log T`.
pub fn short_threshold(t: f64, eps: f64) -> Result<f64> {
    if !(t > 1.0) {
        return domain(format!("short threshold needs T > 1, got {t}"));
    }
    if !(eps > -1.0) {
        return domain(format!("short threshold needs eps > -1, got {eps}"));
    }
    Ok((1.0 + eps) * t.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// `N = round(T log T)` copies.
    Full,
    /// `N = round(log T)` copies.
    Short,
}

impl SampleMode {
    pub fn sample_count(self, t: u64) -> u64 {
        let lt = (t as f64).ln();
        match self {
            SampleMode::Full => (t as f64 * lt).round() as u64,
            SampleMode::Short => lt.round() as u64,
        }
    }

    pub fn threshold(self, t: u64, eps: f64) -> Result<f64> {
        match self {
            SampleMode::Full => fgh_threshold(t as f64, eps),
            SampleMode::Short => short_threshold(t as f64, eps),
        }
    }
}

impl fmt::Display for SampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMode::Full => "full",
            SampleMode::Short => "short",
        })
    }
}

impl FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SampleMode::Full),
            "short" => Ok(SampleMode::Short),
            other => Err(Error::Config(format!("unknown sample mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremeTrial {
    pub mode: SampleMode,
    pub t: u64,
    pub n: u64,
    pub trial_seed: u64,
    pub max_abs: f64,
    pub argmax_replica: u64,
    pub threshold_eps: f64,
    pub threshold: f64,
    pub below_threshold: bool,
}

/// Maximum of `|M(T)|` over replicas `0..n` of `trial_seed`, with the
/// smallest maximising index.
pub fn max_over_replicas(
    kind: RmfKind,
    t: u64,
    n: u64,
    trial_seed: u64,
    width: usize,
    table: &FactorTable,
) -> Result<(f64, u64)> {
    if n == 0 {
        return domain("maximum over zero replicas");
    }
    let limit = t.max(2);
    let spec = WeightSpec::default();
    let values = map_indexed(width, n, |i| {
        let sample = RmfSample::new(kind, limit, replica_seed(trial_seed, i), table)?;
        Ok(partial_sum(&sample, t, &spec, table)?.norm())
    })?;
    let mut best = (values[0], 0u64);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.0 {
            best = (v, i as u64);
        }
    }
    Ok(best)
}

/// One trial of the max-of-`N` experiment. Full mode is limited to
/// `T <= full_mode_max_t`.
#[allow(clippy::too_many_arguments)]
pub fn max_of_samples(
    kind: RmfKind,
    t: u64,
    mode: SampleMode,
    trial_seed: u64,
    eps: f64,
    full_mode_max_t: u64,
    width: usize,
    table: &FactorTable,
) -> Result<ExtremeTrial> {
    if mode == SampleMode::Full && t > full_mode_max_t {
        return Err(Error::Capacity(format!(
            "full-mode extremes limited to T <= {full_mode_max_t}, got T={t}"
        )));
    }
    let threshold = mode.threshold(t, eps)?;
    let n = mode.sample_count(t);
    if n == 0 {
        return domain(format!("{mode} mode at T={t} gives N=0 samples"));
    }
    let (max_abs, argmax_replica) = max_over_replicas(kind, t, n, trial_seed, width, table)?;
    Ok(ExtremeTrial {
        mode,
        t,
        n,
        trial_seed,
        max_abs,
        argmax_replica,
        threshold_eps: eps,
        threshold,
        below_threshold: max_abs <= threshold,
    })
}

/// `trials` independent trials; trial `j` uses `trial_seed(seed, j)`.
#[allow(clippy::too_many_arguments)]
pub fn extreme_trials(
    kind: RmfKind,
    t: u64,
    mode: SampleMode,
    trials: u64,
    seed: u64,
    eps: f64,
    full_mode_max_t: u64,
    width: usize,
    table: &FactorTable,
) -> Result<Vec<ExtremeTrial>> {
    (0..trials)
        .map(|j| max_of_samples(kind, t, mode, trial_seed(seed, j), eps, full_mode_max_t, width, table))
        .collect()
}

/// Growth statistics of one realisation over integers `T ∈ [16, T_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub seed: u64,
    /// `sup |M(T)| / (log T)^{1/2+ε}` and the first `T` attaining it.
    pub upper_stat: f64,
    pub upper_argmax: u64,
    /// `sup |M(T)| / exp(L √(log log T))` and the first `T` attaining it.
    pub lower_stat: f64,
    pub lower_argmax: u64,
    pub blocks: Vec<GrowthBlock>,
}

/// `max |M(T)|` over `T` in `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBlock {
    pub start: u64,
    pub end: u64,
    pub max_abs: f64,
}

/// Block edges `{16} ∪ {⌊e^{j⁴}⌋ : 16 < e^{j⁴} < T_max} ∪ {T_max}`.
pub fn growth_block_edges(t_max: u64) -> Vec<u64> {
    let mut edges = vec![GROWTH_MIN_T];
    for j in 1u32.. {
        let x = (j.pow(4) as f64).exp();
        if x >= t_max as f64 {
            break;
        }
        let x = x.floor() as u64;
        if x > GROWTH_MIN_T {
            edges.push(x);
        }
    }
    if t_max > GROWTH_MIN_T {
        edges.push(t_max);
    }
    edges
}

/// Upper and lower growth statistics plus block maxima for each seed.
/// Each realisation is sampled with `seeds[i]` directly.
pub fn as_growth_experiment(
    kind: RmfKind,
    seeds: &[u64],
    t_max: u64,
    eps: f64,
    l: f64,
    width: usize,
    table: &FactorTable,
) -> Result<Vec<GrowthRow>> {
    if t_max < GROWTH_MIN_T {
        return Err(Error::Config(format!("T_max must be >= {GROWTH_MIN_T}, got {t_max}")));
    }
    table.check_range(t_max)?;
    if !(eps > 0.0 && eps.is_finite()) || !(l > 0.0 && l.is_finite()) {
        return Err(Error::Config(format!("need eps > 0 and L > 0, got eps={eps}, L={l}")));
    }
    let edges = growth_block_edges(t_max);
    let spec = WeightSpec::default();
    map_indexed(width, seeds.len() as u64, |i| {
        let seed = seeds[i as usize];
        let sample = RmfSample::new(kind, t_max, seed, table)?;
        let prefix = prefix_sums(&sample, t_max, &spec, table)?;
        let mut row = GrowthRow {
            seed,
            upper_stat: f64::NEG_INFINITY,
            upper_argmax: 0,
            lower_stat: f64::NEG_INFINITY,
            lower_argmax: 0,
            blocks: Vec::new(),
        };
        for t in GROWTH_MIN_T..=t_max {
            let a = prefix[t as usize].norm();
            let up = a / upper_normalizer(t as f64, eps);
            let lo = a / lower_normalizer(t as f64, l);
            if up > row.upper_stat {
                row.upper_stat = up;
                row.upper_argmax = t;
            }
            if lo > row.lower_stat {
                row.lower_stat = lo;
                row.lower_argmax = t;
            }
        }
        if edges.len() == 1 {
            row.blocks.push(GrowthBlock {
                start: GROWTH_MIN_T,
                end: GROWTH_MIN_T,
                max_abs: prefix[GROWTH_MIN_T as usize].norm(),
            });
        }
        for (j, w) in edges.windows(2).enumerate() {
            let start = if j == 0 { w[0] } else { w[0] + 1 };
            let max_abs = (start..=w[1])
                .map(|t| prefix[t as usize].norm())
                .fold(0.0, f64::max);
            row.blocks.push(GrowthBlock { start, end: w[1], max_abs });
        }
        Ok(row)
    })
}
