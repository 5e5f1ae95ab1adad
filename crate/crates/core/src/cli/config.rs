//! Experiment configuration: a TOML document, overridden by command line
//! flags, resolved to per-experiment defaults and validated before any
//! work starts.

use crate::error::{Error, Result};
use crate::extremes::{SampleMode, FULL_MODE_MAX_T};
use crate::moments::{EnvelopeConstants, BRUTE_MAX_K, BRUTE_MAX_T, EXACT_K1_MAX_T, EXACT_K2_MAX_T, EXACT_K3_MAX_T};
use crate::numtheory::MAX_TABLE_LIMIT;
use crate::rmf::RmfKind;
use crate::tails::MIN_TAIL_REPLICAS;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::PathBuf;

/// Environment variable naming the default output directory.
pub const ENV_OUTPUT_DIR: &str = "RMFLAB_OUTPUT_DIR";
/// Environment variable naming the default worker count.
pub const ENV_THREADS: &str = "RMFLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Moments,
    Tails,
    Extremes,
    Trajectory,
    Weissler,
    Parseval,
    SigmaT,
    VerifyAll,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Moments => "moments",
            Experiment::Tails => "tails",
            Experiment::Extremes => "extremes",
            Experiment::Trajectory => "trajectory",
            Experiment::Weissler => "weissler",
            Experiment::Parseval => "parseval",
            Experiment::SigmaT => "sigma_t",
            Experiment::VerifyAll => "verify_all",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Mc,
    Exact,
    Brute,
}

impl fmt::Display for MomentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentMethod::Mc => "mc",
            MomentMethod::Exact => "exact",
            MomentMethod::Brute => "brute",
        })
    }
}

/// A full 64-bit seed. TOML integers stop at `i64::MAX`, so seeds may also
/// be written as decimal or `0x` hexadecimal strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse::<u64>(),
        };
        parsed.map(Seed).map_err(|_| Error::Config(format!("invalid seed {s:?}")))
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) => Ok(Seed(v)),
            Raw::Str(s) => Seed::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Every recognised key. Keys that do not apply to the chosen experiment
/// are rejected during validation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<RmfKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<Seed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MomentMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<SampleMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_mode_max_t: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_sizes: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_grid: Option<Vec<f64>>,
}

/// Keys each experiment accepts besides the common ones.
fn allowed_keys(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::Moments => &["t_grid", "k_grid", "method", "envelope", "replicas"],
        Experiment::Tails => &["t", "v_grid", "replicas"],
        Experiment::Extremes => &["t", "mode", "trials", "eps", "full_mode_max_t"],
        Experiment::Trajectory => &["t_grid", "t_max", "replicas", "eps", "l"],
        Experiment::Weissler => &["t", "p", "q", "rho", "replicas"],
        Experiment::Parseval => &["support_sizes", "sigma_grid"],
        Experiment::SigmaT => &["t", "replicas"],
        Experiment::VerifyAll => &[],
    }
}

const COMMON_KEYS: [&str; 5] = ["experiment", "kind", "seed", "parallel_width", "output_dir"];

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl ExperimentConfig {
    /// Parses a TOML document; unknown keys are rejected.
    pub fn from_toml_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(one_line(&e.to_string())))
    }

    /// Fills defaults for the selected experiment and validates every field.
    pub fn resolve(mut self, env_output_dir: Option<PathBuf>, env_threads: Option<usize>) -> Result<Self> {
        let Some(exp) = self.experiment else {
            return cfg_err("no experiment selected");
        };
        let present = toml::Value::try_from(&self).map_err(|e| Error::Config(one_line(&e.to_string())))?;
        if let toml::Value::Table(t) = present {
            for key in t.keys() {
                if !COMMON_KEYS.contains(&key.as_str()) && !allowed_keys(exp).contains(&key.as_str()) {
                    return cfg_err(format!("key `{key}` does not apply to experiment {exp}"));
                }
            }
        }
        self.kind.get_or_insert(RmfKind::Steinhaus);
        self.seed.get_or_insert(Seed(0));
        if self.output_dir.is_none() {
            self.output_dir = Some(env_output_dir.unwrap_or_else(|| PathBuf::from("rmf-lab-out")));
        }
        if self.parallel_width.is_none() {
            self.parallel_width = Some(env_threads.unwrap_or(1));
        }
        if self.parallel_width == Some(0) {
            return cfg_err("parallel_width must be >= 1");
        }
        match exp {
            Experiment::Moments => {
                self.t_grid.get_or_insert_with(|| vec![100]);
                self.k_grid.get_or_insert_with(|| vec![1.0]);
                self.method.get_or_insert(MomentMethod::Mc);
                self.envelope.get_or_insert_with(EnvelopeConstants::default);
                if self.method == Some(MomentMethod::Mc) {
                    self.replicas.get_or_insert(1000);
                }
            }
            Experiment::Tails => {
                self.t.get_or_insert(1000);
                self.v_grid.get_or_insert_with(|| vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]);
                self.replicas.get_or_insert(1000);
            }
            Experiment::Extremes => {
                self.t.get_or_insert(1000);
                self.mode.get_or_insert(SampleMode::Full);
                self.trials.get_or_insert(1);
                self.eps.get_or_insert(0.5);
                self.full_mode_max_t.get_or_insert(FULL_MODE_MAX_T);
            }
            Experiment::Trajectory => {
                let t_max = *self.t_max.get_or_insert(100_000);
                self.t_grid.get_or_insert_with(|| {
                    let mut g: Vec<u64> = std::iter::successors(Some(10u64), |x| x.checked_mul(10))
                        .take_while(|&x| x < t_max)
                        .collect();
                    g.push(t_max);
                    g
                });
                self.replicas.get_or_insert(4);
                self.eps.get_or_insert(0.25);
                self.l.get_or_insert(1.0);
            }
            Experiment::Weissler => {
                self.t.get_or_insert(1000);
                let p = *self.p.get_or_insert(2.0);
                let q = *self.q.get_or_insert(4.0);
                self.rho.get_or_insert((p / q).sqrt());
                self.replicas.get_or_insert(1000);
            }
            Experiment::Parseval => {
                self.support_sizes.get_or_insert_with(|| vec![1, 2, 5, 20]);
                self.sigma_grid.get_or_insert_with(|| vec![0.25, 0.5, 1.0, 2.0]);
            }
            Experiment::SigmaT => {
                self.t.get_or_insert(10_000);
                self.replicas.get_or_insert(1000);
            }
            Experiment::VerifyAll => {}
        }
        self.validate(exp)?;
        Ok(self)
    }

    fn validate(&self, exp: Experiment) -> Result<()> {
        let limit_ok = |t: u64, what: &str| -> Result<()> {
            if t == 0 {
                return cfg_err(format!("{what} must be >= 1"));
            }
            if t > MAX_TABLE_LIMIT {
                return Err(Error::Capacity(format!("{what}={t} exceeds the sieve limit {MAX_TABLE_LIMIT}")));
            }
            Ok(())
        };
        let min_replicas = |n: u64| -> Result<()> {
            match self.replicas {
                Some(r) if r >= n => Ok(()),
                Some(r) => cfg_err(format!("replicas must be >= {n}, got {r}")),
                None => Ok(()),
            }
        };
        match exp {
            Experiment::Moments => {
                let ts = self.t_grid.as_deref().unwrap_or_default();
                let ks = self.k_grid.as_deref().unwrap_or_default();
                if ts.is_empty() || ks.is_empty() {
                    return cfg_err("t_grid and k_grid must be non-empty");
                }
                for &t in ts {
                    limit_ok(t, "T")?;
                }
                for &k in ks {
                    if !(k > 0.0 && k.is_finite()) {
                        return Err(Error::Domain(format!("moment order k must be > 0, got {k}")));
                    }
                }
                let method = self.method.unwrap_or(MomentMethod::Mc);
                match method {
                    MomentMethod::Mc => min_replicas(2)?,
                    MomentMethod::Exact | MomentMethod::Brute => {
                        if self.replicas.is_some() {
                            return cfg_err(format!("replicas does not apply to method {method}"));
                        }
                        for &k in ks {
                            if k.fract() != 0.0 {
                                return cfg_err(format!("method {method} needs integer k, got {k}"));
                            }
                            for &t in ts {
                                check_exact_capacity(method, t, k as u64)?;
                            }
                        }
                    }
                }
            }
            Experiment::Tails => {
                limit_ok(self.t.unwrap_or(1), "T")?;
                min_replicas(MIN_TAIL_REPLICAS)?;
                let v = self.v_grid.as_deref().unwrap_or_default();
                if v.is_empty() || v.iter().any(|x| x.is_nan()) || v.windows(2).any(|w| w[0] >= w[1]) {
                    return cfg_err("v_grid must be non-empty and strictly increasing");
                }
            }
            Experiment::Extremes => {
                let t = self.t.unwrap_or(0);
                if t < 16 {
                    return Err(Error::Domain(format!("extremes need T >= 16, got {t}")));
                }
                limit_ok(t, "T")?;
                let eps = self.eps.unwrap_or(0.0);
                let mode = self.mode.unwrap_or(SampleMode::Full);
                let floor = if mode == SampleMode::Full { -0.5 } else { -1.0 };
                if !(eps > floor && eps.is_finite()) {
                    return Err(Error::Domain(format!("eps must exceed {floor} in {mode} mode, got {eps}")));
                }
                if mode == SampleMode::Full && t > self.full_mode_max_t.unwrap_or(FULL_MODE_MAX_T) {
                    return Err(Error::Capacity(format!(
                        "full-mode extremes limited to T <= {}, got T={t}",
                        self.full_mode_max_t.unwrap_or(FULL_MODE_MAX_T)
                    )));
                }
                if self.trials == Some(0) {
                    return cfg_err("trials must be >= 1");
                }
            }
            Experiment::Trajectory => {
                let t_max = self.t_max.unwrap_or(0);
                if t_max < 16 {
                    return cfg_err(format!("t_max must be >= 16, got {t_max}"));
                }
                limit_ok(t_max, "t_max")?;
                let g = self.t_grid.as_deref().unwrap_or_default();
                if g.is_empty() || g[0] == 0 || g.windows(2).any(|w| w[0] >= w[1]) || *g.last().unwrap() > t_max {
                    return cfg_err("t_grid must be positive, strictly increasing and <= t_max");
                }
                min_replicas(1)?;
                for (name, v) in [("eps", self.eps), ("l", self.l)] {
                    let v = v.unwrap_or(0.0);
                    if !(v > 0.0 && v.is_finite()) {
                        return cfg_err(format!("{name} must be > 0, got {v}"));
                    }
                }
            }
            Experiment::Weissler => {
                limit_ok(self.t.unwrap_or(1), "T")?;
                min_replicas(2)?;
                let (p, q, rho) = (self.p.unwrap_or(0.0), self.q.unwrap_or(0.0), self.rho.unwrap_or(-1.0));
                if !(p > 0.0 && p <= q && q.is_finite()) {
                    return Err(Error::Precondition(format!("need 0 < p <= q, got p={p}, q={q}")));
                }
                let bound = (p / q).sqrt();
                if !(rho >= 0.0) || rho > bound * (1.0 + 1e-12) {
                    return Err(Error::Precondition(format!("need 0 <= rho <= sqrt(p/q) = {bound}, got {rho}")));
                }
            }
            Experiment::Parseval => {
                let sizes = self.support_sizes.as_deref().unwrap_or_default();
                let sigmas = self.sigma_grid.as_deref().unwrap_or_default();
                if sizes.is_empty() || sigmas.is_empty() {
                    return cfg_err("support_sizes and sigma_grid must be non-empty");
                }
                if sizes.iter().any(|&s| s == 0 || s > 1000) {
                    return cfg_err("support sizes must lie in [1, 1000]");
                }
                for &s in sigmas {
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::Domain(format!("Parseval needs sigma > 0, got {s}")));
                    }
                }
            }
            Experiment::SigmaT => {
                let t = self.t.unwrap_or(0);
                if t < 16 {
                    return Err(Error::Domain(format!("Sigma_T needs T >= 16, got {t}")));
                }
                limit_ok(t, "T")?;
                min_replicas(2)?;
            }
            Experiment::VerifyAll => {}
        }
        Ok(())
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.expect("resolved config has an experiment")
    }

    pub fn kind(&self) -> RmfKind {
        self.kind.unwrap_or(RmfKind::Steinhaus)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or_default().0
    }

    pub fn width(&self) -> usize {
        self.parallel_width.unwrap_or(1)
    }
}

fn check_exact_capacity(method: MomentMethod, t: u64, k: u64) -> Result<()> {
    let ok = match method {
        MomentMethod::Brute => t <= BRUTE_MAX_T && k <= BRUTE_MAX_K as u64,
        _ => {
            t == 1
                || match k {
                    1 => t <= EXACT_K1_MAX_T,
                    2 => t <= EXACT_K2_MAX_T,
                    3 => t <= EXACT_K3_MAX_T,
                    _ => false,
                }
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Capacity(format!("method {method} does not support T={t}, k={k}")))
    }
}

/// Collapses a possibly multi-line message onto one line.
pub fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_table(src.parse::<toml::Table>().unwrap())
    }

    #[test]
    fn defaults_and_overrides() {
        let c = parse("experiment = \"moments\"\nseed = 7\nt_grid = [100]\n").unwrap();
        let r = c.resolve(None, Some(3)).unwrap();
        assert_eq!(r.seed(), 7);
        assert_eq!(r.width(), 3);
        assert_eq!(r.replicas, Some(1000));
        assert_eq!(r.method, Some(MomentMethod::Mc));
    }

    #[test]
    fn unknown_and_misplaced_keys_are_rejected() {
        assert!(matches!(parse("experiment = \"moments\"\nbogus = 1\n"), Err(Error::Config(_))));
        let c = parse("experiment = \"moments\"\nv_grid = [1.0]\n").unwrap();
        assert!(matches!(c.resolve(None, None), Err(Error::Config(_))));
    }

    #[test]
    fn large_seeds_as_strings() {
        let c = parse("experiment = \"tails\"\nseed = \"0xffffffffffffffff\"\n").unwrap();
        assert_eq!(c.resolve(None, None).unwrap().seed(), u64::MAX);
        assert!(parse("experiment = \"tails\"\nseed = \"nope\"\n").is_err());
    }

    #[test]
    fn validation_errors_map_to_exit_codes() {
        let c = parse("experiment = \"parseval\"\nsigma_grid = [-1.0]\n").unwrap();
        assert_eq!(c.resolve(None, None).unwrap_err().exit_code(), 2);
        let c = parse("experiment = \"moments\"\nmethod = \"exact\"\nt_grid = [20000]\nk_grid = [2.0]\n").unwrap();
        assert_eq!(c.resolve(None, None).unwrap_err().exit_code(), 3);
        let c = parse("experiment = \"extremes\"\nt = 20000\n").unwrap();
        assert_eq!(c.resolve(None, None).unwrap_err().exit_code(), 3);
        let c = parse("experiment = \"weissler\"\np = 1.0\nq = 2.0\nrho = 0.9\n").unwrap();
        assert_eq!(c.resolve(None, None).unwrap_err().exit_code(), 2);
        let c = parse("experiment = \"tails\"\nreplicas = 10\n").unwrap();
        assert_eq!(c.resolve(None, None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = parse("experiment = \"trajectory\"\nt_max = 1000\n").unwrap().resolve(None, None).unwrap();
        assert_eq!(c.t_grid, Some(vec![10, 100, 1000]));
        let json = serde_json::to_value(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
    }
}
