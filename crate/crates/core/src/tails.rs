//! Tail probabilities `Φ_T(V) = P(|M_f(T)| > e^V)`, their theoretical
//! envelopes, and the exact moment/tail duality for empirical measures.

use crate::error::{domain, Error, Result};
use crate::montecarlo::replica_abs;
use crate::numtheory::FactorTable;
use crate::partial_sum::WeightSpec;
use crate::rmf::RmfKind;
use crate::stats::{gaussian_tail, wilson_interval, Z_95};
use crate::summation::KahanSum;
use serde::{Deserialize, Serialize};

/// Fewest replicas accepted by [`tail_curve`].
pub const MIN_TAIL_REPLICAS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub t: u64,
    pub v_grid: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub replicas: u64,
    pub seed: u64,
}

/// Sorted absolute values with a survival-count lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct TailPool {
    sorted: Vec<f64>,
}

impl TailPool {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("tail pool values must be finite and nonnegative");
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of values strictly greater than `x`.
    pub fn count_above(&self, x: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&v| v <= x)
    }
}

/// Empirical `Φ_T(V)` on `v_grid` with 95% Wilson intervals, all
/// thresholds sharing one pool of replicas.
#[allow(clippy::too_many_arguments)]
pub fn tail_curve(
    kind: RmfKind,
    t: u64,
    v_grid: &[f64],
    replicas: u64,
    seed: u64,
    width: usize,
    table: &FactorTable,
) -> Result<TailCurve> {
    if replicas < MIN_TAIL_REPLICAS {
        return Err(Error::Config(format!(
            "tail curve needs at least {MIN_TAIL_REPLICAS} replicas, got {replicas}"
        )));
    }
    if v_grid.iter().any(|v| v.is_nan()) || v_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("V grid must be strictly increasing".into()));
    }
    let abs = replica_abs(kind, t, &WeightSpec::default(), replicas, seed, width, table)?;
    let pool = TailPool::new(abs)?;
    Ok(curve_from_pool(&pool, t, v_grid, seed))
}

/// Tail curve of an existing pool.
pub fn curve_from_pool(pool: &TailPool, t: u64, v_grid: &[f64], seed: u64) -> TailCurve {
    let n = pool.len() as u64;
    let mut curve = TailCurve {
        t,
        v_grid: v_grid.to_vec(),
        phi_hat: Vec::with_capacity(v_grid.len()),
        ci_low: Vec::with_capacity(v_grid.len()),
        ci_high: Vec::with_capacity(v_grid.len()),
        replicas: n,
        seed,
    };
    for &v in v_grid {
        let above = pool.count_above(v.exp()) as u64;
        let (lo, hi) = wilson_interval(above, n, Z_95);
        curve.phi_hat.push(above as f64 / n as f64);
        curve.ci_low.push(lo);
        curve.ci_high.push(hi);
    }
    curve
}

/// `exp(−V²/log((log T)/V))` for `0 < V < log T`.
pub fn tail_envelope_large(t: f64, v: f64) -> Result<f64> {
    if !(t > 1.0) {
        return domain(format!("large-deviation envelope needs T > 1, got {t}"));
    }
    tail_envelope_large_log(t.ln(), v)
}

/// [`tail_envelope_large`] parametrised by `log T`.
pub fn tail_envelope_large_log(log_t: f64, v: f64) -> Result<f64> {
    Ok(log_tail_envelope_large(log_t, v)?.exp())
}

/// Natural log of the large-deviation envelope, `−V²/log((log T)/V)`;
/// stays finite where the envelope itself underflows.
pub fn log_tail_envelope_large(log_t: f64, v: f64) -> Result<f64> {
    if !(v > 0.0 && v < log_t) {
        return domain(format!(
            "large-deviation envelope needs 0 < V < log T, got V={v}, log T={log_t}"
        ));
    }
    Ok(-v * v / (log_t / v).ln())
}

/// Standard normal tail `∫_L^∞ e^{−x²/2} dx/√(2π)`; the small-deviation
/// envelope at `V = L √(½ log log T)`.
pub fn tail_envelope_small(l: f64) -> f64 {
    gaussian_tail(l)
}

/// `V = L √(½ log log T)`.
pub fn small_range_v(t: f64, l: f64) -> f64 {
    l * (0.5 * t.ln().ln()).sqrt()
}

/// Relative gap between `mean(x^{2k})` and `2k ∫ Φ(u) e^{2ku} du`, with `Φ`
/// the empirical survival function of `samples` at `e^u`.
///
/// Between consecutive order statistics `Φ` is constant, so the integral is
/// `Σ_j (N − j)/N · (x_{(j+1)}^{2k} − x_{(j)}^{2k})` with `x_{(0)} = 0`.
pub fn laplace_duality_residual(samples: &[f64], k: f64) -> Result<f64> {
    if samples.is_empty() {
        return domain("duality residual needs at least one sample");
    }
    if !(k > 0.0 && k.is_finite()) {
        return domain(format!("duality residual needs k > 0, got {k}"));
    }
    let pool = TailPool::new(samples.to_vec())?;
    let n = pool.len() as f64;
    let two_k = 2.0 * k;
    let lhs = samples.iter().map(|x| x.powf(two_k)).sum::<KahanSum>().value() / n;
    let mut rhs = KahanSum::new();
    let mut prev = 0.0;
    for (j, &x) in pool.sorted().iter().enumerate() {
        let cur = x.powf(two_k);
        rhs.add((n - j as f64) / n * (cur - prev));
        prev = cur;
    }
    let rhs = rhs.value();
    if lhs == 0.0 {
        return Ok(rhs.abs());
    }
    Ok((lhs - rhs).abs() / lhs)
}
