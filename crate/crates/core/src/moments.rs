//! Moments `E|M_f(T)|^{2k}`: Monte Carlo estimates, exact values for integer
//! `k` via truncated divisor functions, theoretical envelopes, and the
//! hypercontractive and divisor-weighted moment inequalities.

use crate::error::{domain, Error, Result};
use crate::montecarlo::{map_replicas, replica_sums};
use crate::numtheory::FactorTable;
use crate::partial_sum::{partial_sum, WeightSpec};
use crate::rmf::{RmfKind, RmfSample};
use crate::stats::mean_stderr;
use crate::summation::KahanSum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Largest `T` accepted by [`exact_moment_integer_k`] for each `k`.
pub const EXACT_K1_MAX_T: u64 = 100_000_000;
pub const EXACT_K2_MAX_T: u64 = 10_000;
pub const EXACT_K3_MAX_T: u64 = 200;

/// Largest `T` and `k` for [`brute_force_moment`].
pub const BRUTE_MAX_T: u64 = 12;
pub const BRUTE_MAX_K: u32 = 3;

const SEGMENT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub t: u64,
    pub k: f64,
    pub replicas: u64,
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Monte Carlo mean of `|M(T)|^{2k}` over independent replicas.
#[allow(clippy::too_many_arguments)]
pub fn mc_moment(
    kind: RmfKind,
    t: u64,
    k: f64,
    spec: &WeightSpec,
    replicas: u64,
    seed: u64,
    width: usize,
    table: &FactorTable,
) -> Result<MomentEstimate> {
    if !(k > 0.0 && k.is_finite()) {
        return domain(format!("moment order k must be > 0, got {k}"));
    }
    if replicas < 2 {
        return Err(Error::Config(format!("need at least 2 replicas, got {replicas}")));
    }
    let values: Vec<f64> = replica_sums(kind, t, spec, replicas, seed, width, table)?
        .into_iter()
        .map(|z| z.norm().powf(2.0 * k))
        .collect();
    let (mean, stderr) = mean_stderr(&values);
    Ok(MomentEstimate { t, k, replicas, mean, stderr, seed })
}

/// `d_{j+1,T}` from `d_{j,T}`: `next(n) = Σ_{a≤T, a|n} prev(n/a)`.
fn convolve_dense(prev: &[u64], t: u64) -> Vec<u64> {
    let prev_max = prev.len() - 1;
    let len = prev_max * t as usize;
    let mut next = vec![0u64; len + 1];
    for a in 1..=t as usize {
        for (m, &c) in prev.iter().enumerate().skip(1) {
            if c != 0 {
                next[a * m] += c;
            }
        }
    }
    next
}

/// Exact `E|M_f(T)|^{2k} = Σ_{n≤T^k} d_{k,T}(n)²/n` for Steinhaus `f`.
///
/// The first `k − 1` truncated convolutions are held densely; the last
/// level is produced in segments of `n`, so memory stays at `O(T^{k−1})`.
pub fn exact_moment_integer_k(t: u64, k: u32) -> Result<f64> {
    if t == 0 || k == 0 {
        return domain(format!("exact moment needs T >= 1 and k >= 1, got T={t}, k={k}"));
    }
    if t == 1 {
        return Ok(1.0);
    }
    let cap = match k {
        1 => EXACT_K1_MAX_T,
        2 => EXACT_K2_MAX_T,
        3 => EXACT_K3_MAX_T,
        _ => 0,
    };
    if t > cap {
        return Err(Error::Capacity(format!(
            "exact moment supports k=1 with T<={EXACT_K1_MAX_T}, k=2 with T<={EXACT_K2_MAX_T}, \
             k=3 with T<={EXACT_K3_MAX_T}; got k={k}, T={t}"
        )));
    }
    // d_{0,T} = indicator of {1}
    let mut base = vec![0u64, 1];
    for _ in 1..k {
        base = convolve_dense(&base, t);
    }
    let base_max = base.len() - 1;
    let total = base_max as u64 * t;

    let mut acc = KahanSum::new();
    let mut buf = vec![0u64; SEGMENT];
    let mut lo = 1u64;
    while lo <= total {
        let hi = (lo + SEGMENT as u64).min(total + 1);
        let width = (hi - lo) as usize;
        buf[..width].fill(0);
        for a in 1..=t {
            let m_lo = lo.div_ceil(a).max(1) as usize;
            let m_hi = ((hi - 1) / a).min(base_max as u64) as usize;
            for m in m_lo..=m_hi {
                let c = base[m];
                if c != 0 {
                    buf[(a as usize * m) - lo as usize] += c;
                }
            }
        }
        for (i, &c) in buf[..width].iter().enumerate() {
            if c != 0 {
                let c = c as f64;
                acc.add(c * c / (lo as usize + i) as f64);
            }
        }
        lo = hi;
    }
    Ok(acc.value())
}

/// Direct enumeration of all `2k`-tuples in `[1, T]^{2k}` with
/// `n_1⋯n_k = n_{k+1}⋯n_{2k}`, each weighted by `(n_1⋯n_{2k})^{-1/2}`.
pub fn brute_force_moment(t: u64, k: u32) -> Result<f64> {
    if t == 0 || k == 0 {
        return domain(format!("brute force moment needs T >= 1 and k >= 1, got T={t}, k={k}"));
    }
    if t > BRUTE_MAX_T || k > BRUTE_MAX_K {
        return Err(Error::Capacity(format!(
            "brute force moment limited to T<={BRUTE_MAX_T}, k<={BRUTE_MAX_K}; got T={t}, k={k}"
        )));
    }
    let dims = 2 * k as usize;
    let mut tuple = vec![1u64; dims];
    let mut acc = KahanSum::new();
    loop {
        let left: u64 = tuple[..k as usize].iter().product();
        let right: u64 = tuple[k as usize..].iter().product();
        if left == right {
            let all: u64 = tuple.iter().product();
            acc.add(1.0 / (all as f64).sqrt());
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == dims {
                return Ok(acc.value());
            }
            if tuple[i] < t {
                tuple[i] += 1;
                break;
            }
            tuple[i] = 1;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FixedKPseudo,
    MainRange,
    LargeK,
    SmallKGerspach,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::FixedKPseudo => "fixed_k_pseudo",
            Regime::MainRange => "main_range",
            Regime::LargeK => "large_k",
            Regime::SmallKGerspach => "small_k_gerspach",
        })
    }
}

/// Instantiations of the unspecified constants in the moment bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConstants {
    /// Coefficient of the `O(k²)` term in the main range and in the
    /// general lower bound.
    pub a: f64,
    /// Upper end `C log T / log log T` of the main range, exponent of
    /// `e^{Ck²}` for large `k`, and prefactor of the small-`k` bound.
    pub c_big: f64,
    /// Lower end `c log T / log log T` of the large-`k` bound.
    pub c_small: f64,
    /// `E ≥ (log T)^{k²}/c1` for fixed `k` and for `k < 1`.
    pub c1: f64,
    /// `E ≤ c2 (log T)^{k²}` for fixed `k`.
    pub c2: f64,
}

impl Default for EnvelopeConstants {
    fn default() -> Self {
        Self { a: 10.0, c_big: 10.0, c_small: 1.0, c1: 10.0, c2: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBand {
    pub t: f64,
    pub k: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    pub regime: Regime,
    pub constants: EnvelopeConstants,
}

impl EnvelopeBand {
    pub fn contains(&self, value: f64) -> bool {
        let l = value.ln();
        self.log_lower <= l && l <= self.log_upper
    }
}

/// Log-scale band for `E|M_f(T)|^{2k}` with the implicit constants taken
/// from `constants`.
pub fn moment_envelope(t: f64, k: f64, constants: &EnvelopeConstants) -> Result<EnvelopeBand> {
    if !(t >= 16.0 && t.is_finite()) {
        return domain(format!("moment envelope needs T >= 16, got {t}"));
    }
    moment_envelope_log(t.ln(), k, constants)
}

/// [`moment_envelope`] parametrised by `log T`, for `T` beyond `f64` range.
/// The returned band reports `t = exp(log_t)`, which may be infinite.
pub fn moment_envelope_log(
    log_t: f64,
    k: f64,
    constants: &EnvelopeConstants,
) -> Result<EnvelopeBand> {
    if !(log_t >= 16f64.ln() && log_t.is_finite()) {
        return domain(format!("moment envelope needs log T >= log 16, got {log_t}"));
    }
    if !(k > 0.0 && k.is_finite()) {
        return domain(format!("moment envelope needs k > 0, got {k}"));
    }
    let ll = log_t.ln();
    let regime = if k < 1.0 {
        Regime::SmallKGerspach
    } else if k < 10.0 {
        Regime::FixedKPseudo
    } else if k <= constants.c_big * log_t / ll {
        Regime::MainRange
    } else {
        Regime::LargeK
    };
    let k2 = k * k;
    let main = || k2 * (ll - k.ln() - k.ln().ln());
    let (lower, upper) = match regime {
        Regime::FixedKPseudo => (k2 * ll - constants.c1.ln(), k2 * ll + constants.c2.ln()),
        Regime::MainRange => (main() - constants.a * k2, main() + constants.a * k2),
        Regime::LargeK => {
            let upper = constants.c_big * k2 + (k2 * ll - k2 * k.ln()).max(0.0);
            (main() - constants.a * k2, upper)
        }
        Regime::SmallKGerspach => {
            let lll = ll.ln();
            if !(lll > 0.0) {
                return domain(format!("log log log T must be positive, log T={log_t}"));
            }
            let inv2 = 1.0 / k2;
            let upper = constants.c_big * (k2 * ll).exp() * inv2.min(ll) * inv2.min(lll)
                + (2.0 / k) * (1.0 / k).min(lll);
            (k2 * ll - constants.c1.ln(), upper.ln())
        }
    };
    Ok(EnvelopeBand {
        t: log_t.exp(),
        k,
        log_lower: lower.min(upper),
        log_upper: upper.max(lower),
        regime,
        constants: *constants,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeisslerReport {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub satisfied_with_margin: bool,
}

/// `E[|X|^r]^{1/r}` with a delta-method standard error.
fn norm_estimate(abs_values: &[f64], r: f64) -> (f64, f64) {
    let powered: Vec<f64> = abs_values.iter().map(|x| x.powf(r)).collect();
    let (mean, se) = mean_stderr(&powered);
    let value = mean.powf(1.0 / r);
    let stderr = if mean > 0.0 { se * value / (r * mean) } else { 0.0 };
    (value, stderr)
}

/// Compares `E[|F_ρ(T)|^q]^{1/q}` with `E[|F(T)|^p]^{1/p}`, both estimated
/// on the same replicas. `F_ρ` multiplies every term by `ρ^{Ω(n)}`.
#[allow(clippy::too_many_arguments)]
pub fn weissler_check(
    kind: RmfKind,
    t: u64,
    p: f64,
    q: f64,
    rho: f64,
    spec: &WeightSpec,
    replicas: u64,
    seed: u64,
    width: usize,
    table: &FactorTable,
) -> Result<WeisslerReport> {
    if !(p > 0.0 && p <= q && q.is_finite()) {
        return Err(Error::Precondition(format!("need 0 < p <= q, got p={p}, q={q}")));
    }
    let bound = (p / q).sqrt();
    if !(rho >= 0.0) || rho > bound * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "need 0 <= rho <= sqrt(p/q) = {bound}, got rho={rho}"
        )));
    }
    if replicas < 2 {
        return Err(Error::Config(format!("need at least 2 replicas, got {replicas}")));
    }
    spec.validate()?;
    let damped = WeightSpec { rho: spec.rho * rho, ..*spec };
    let pairs = map_replicas(kind, t, replicas, seed, width, table, |s| {
        Ok((partial_sum(s, t, &damped, table)?.norm(), partial_sum(s, t, spec, table)?.norm()))
    })?;
    let (damped_abs, plain_abs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (lhs, lhs_stderr) = norm_estimate(&damped_abs, q);
    let (rhs, rhs_stderr) = norm_estimate(&plain_abs, p);
    let satisfied_with_margin = lhs + 2.0 * lhs_stderr <= rhs - 2.0 * rhs_stderr || lhs <= rhs;
    Ok(WeisslerReport { lhs, lhs_stderr, rhs, rhs_stderr, satisfied_with_margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentLemmaReport {
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// Exact left side, when `ell <= 2` and the support has at most 12 points.
    pub lhs_exact: Option<f64>,
    pub rhs: f64,
}

/// Exact `E|Σ b_n f(n)|^{2ℓ}` for Steinhaus `f` by expanding the ℓ-th power:
/// `Σ_m |Σ_{n_1⋯n_ℓ=m} b_{n_1}⋯b_{n_ℓ}|²`.
fn expanded_moment(b: &BTreeMap<u64, Complex64>, ell: u32) -> f64 {
    let mut power: BTreeMap<u64, Complex64> = BTreeMap::from([(1, Complex64::new(1.0, 0.0))]);
    for _ in 0..ell {
        let mut next: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (&m, &c) in &power {
            for (&n, &bn) in b {
                *next.entry(m * n).or_default() += c * bn;
            }
        }
        power = next;
    }
    power.values().map(|c| c.norm_sqr()).sum::<KahanSum>().value()
}

/// Checks `E|Σ a(n) f(n)/√n|^{2ℓ} <= (Σ |a(n)|² τ_ℓ(n)/n)^ℓ` for a finitely
/// supported coefficient sequence (Steinhaus `f`).
pub fn lemma_moment_bound_check(
    coefficients: &[(u64, Complex64)],
    ell: u32,
    replicas: u64,
    seed: u64,
    width: usize,
    table: &FactorTable,
) -> Result<MomentLemmaReport> {
    if coefficients.iter().any(|&(n, _)| n == 0) {
        return domain("coefficient support must be positive integers");
    }
    if replicas < 2 {
        return Err(Error::Config(format!("need at least 2 replicas, got {replicas}")));
    }
    let mut b: BTreeMap<u64, Complex64> = BTreeMap::new();
    for &(n, a) in coefficients {
        *b.entry(n).or_default() += a / (n as f64).sqrt();
    }
    let rhs = if ell == 0 {
        1.0
    } else {
        let mut acc = KahanSum::new();
        for &(n, a) in coefficients {
            acc.add(a.norm_sqr() * table.tau_ell(n, ell)? as f64 / n as f64);
        }
        acc.value().powi(ell as i32)
    };
    let limit = b.keys().next_back().copied().unwrap_or(2);
    table.check_range(limit)?;
    let values = map_replicas(RmfKind::Steinhaus, limit, replicas, seed, width, table, |s: &RmfSample| {
        let mut z = Complex64::new(0.0, 0.0);
        for (&n, &bn) in &b {
            z += bn * s.eval(n, table)?;
        }
        Ok(z.norm_sqr().powi(ell as i32))
    })?;
    let (lhs, lhs_stderr) = mean_stderr(&values);
    let lhs_exact = (ell <= 2 && b.len() <= 12).then(|| expanded_moment(&b, ell));
    Ok(MomentLemmaReport { lhs, lhs_stderr, lhs_exact, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_sum::harmonic;
    use std::sync::OnceLock;

    fn table() -> &'static FactorTable {
        static T: OnceLock<FactorTable> = OnceLock::new();
        T.get_or_init(|| FactorTable::new(100_000).unwrap())
    }

    #[test]
    fn exact_examples() {
        assert!((exact_moment_integer_k(3, 1).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        assert!((exact_moment_integer_k(2, 2).unwrap() - 13.0 / 4.0).abs() < 1e-15);
        // d_{2,3} on {1,2,3,4,6,9} is (1,2,2,1,2,1)
        let expected = 1.0 + 4.0 / 2.0 + 4.0 / 3.0 + 1.0 / 4.0 + 4.0 / 6.0 + 1.0 / 9.0;
        assert!((exact_moment_integer_k(3, 2).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 193.0 / 36.0).abs() < 1e-14);
        assert_eq!(exact_moment_integer_k(1, 5).unwrap(), 1.0);
        assert!((exact_moment_integer_k(1000, 1).unwrap() - harmonic(1000)).abs() < 1e-13);
    }

    #[test]
    fn exact_capacity_errors() {
        assert!(matches!(exact_moment_integer_k(10_001, 2), Err(Error::Capacity(_))));
        assert!(matches!(exact_moment_integer_k(201, 3), Err(Error::Capacity(_))));
        assert!(matches!(exact_moment_integer_k(5, 4), Err(Error::Capacity(_))));
        assert!(matches!(exact_moment_integer_k(5, 0), Err(Error::Domain(_))));
        assert!(matches!(brute_force_moment(13, 1), Err(Error::Capacity(_))));
        assert!(matches!(brute_force_moment(3, 4), Err(Error::Capacity(_))));
    }

    #[test]
    fn brute_force_examples() {
        assert!((brute_force_moment(2, 2).unwrap() - 3.25).abs() < 1e-15);
        for k in 1..=3 {
            assert_eq!(brute_force_moment(1, k).unwrap(), 1.0);
        }
        assert!((brute_force_moment(3, 1).unwrap() - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exact_is_nondecreasing_in_t() {
        for k in 1..=3u32 {
            let mut prev = 0.0;
            for t in 1..=40u64 {
                let v = exact_moment_integer_k(t, k).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn segmented_pass_crosses_segment_boundaries() {
        // T^2 > SEGMENT exercises more than one segment.
        let t = 1100u64;
        let dense = {
            let d = convolve_dense(&convolve_dense(&[0, 1], t), t);
            d.iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &c)| c != 0)
                .map(|(n, &c)| (c * c) as f64 / n as f64)
                .sum::<KahanSum>()
                .value()
        };
        let segmented = exact_moment_integer_k(t, 2).unwrap();
        assert!((dense - segmented).abs() < 1e-12 * dense);
    }

    #[test]
    fn mc_moment_examples() {
        let t = table();
        let spec = WeightSpec::default();
        let e = mc_moment(RmfKind::Steinhaus, 1, 1.5, &spec, 10, 3, 1, t).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        let e = mc_moment(RmfKind::Steinhaus, 100, 1.0, &spec, 5000, 7, 1, t).unwrap();
        let h = harmonic(100);
        assert!((h - 5.187_377_517_639_621).abs() < 1e-12);
        assert!((e.mean - h).abs() <= 4.0 * e.stderr);
        let e = mc_moment(RmfKind::Steinhaus, 2, 2.0, &spec, 100_000, 8, 1, t).unwrap();
        assert!((e.mean - 3.25).abs() <= 4.0 * e.stderr, "{e:?}");
        assert!(mc_moment(RmfKind::Steinhaus, 2, 0.0, &spec, 10, 8, 1, t).is_err());
        assert!(mc_moment(RmfKind::Steinhaus, 2, 1.0, &spec, 1, 8, 1, t).is_err());
    }

    #[test]
    fn envelope_examples() {
        let c = EnvelopeConstants::default();
        let t = 1e6;
        let ll = f64::ln(f64::ln(t));
        let band = moment_envelope(t, 1.0, &c).unwrap();
        assert_eq!(band.regime, Regime::FixedKPseudo);
        assert!((band.log_lower - (ll - 10f64.ln())).abs() < 1e-12);
        assert!((band.log_upper - (ll + 10f64.ln())).abs() < 1e-12);

        let band = moment_envelope_log(10f64.exp(), 10.0, &c).unwrap();
        assert_eq!(band.regime, Regime::MainRange);
        let mid = 100.0 * (10.0 - 10f64.ln() - 10f64.ln().ln());
        assert!((0.5 * (band.log_lower + band.log_upper) - mid).abs() < 1e-9);
        assert!((band.log_upper - band.log_lower - 2.0 * 10.0 * 100.0).abs() < 1e-9);

        let band = moment_envelope(t, 0.5, &c).unwrap();
        assert_eq!(band.regime, Regime::SmallKGerspach);
        let lll = ll.ln();
        let upper = 10.0 * (0.25 * ll).exp() * 4f64.min(ll) * 4f64.min(lll) + 4.0 * 2f64.min(lll);
        assert!((band.log_upper - upper.ln()).abs() < 1e-12);

        let band = moment_envelope(1e4, 60.0, &c).unwrap();
        assert_eq!(band.regime, Regime::LargeK);
        assert!(band.log_lower <= band.log_upper);
        assert!(moment_envelope(15.0, 1.0, &c).is_err());
        assert!(moment_envelope(100.0, -1.0, &c).is_err());
    }

    #[test]
    fn envelope_never_inverts() {
        let c = EnvelopeConstants::default();
        for &t in &[16.0, 17.0, 100.0, 1e4, 1e8, 1e30] {
            for &k in &[0.01, 0.3, 0.99, 1.0, 2.5, 9.9, 10.0, 25.0, 400.0] {
                let b = moment_envelope(t, k, &c).unwrap();
                assert!(b.log_lower <= b.log_upper, "T={t} k={k}");
            }
        }
    }

    #[test]
    fn weissler_examples() {
        let t = table();
        let spec = WeightSpec::default();
        let r = weissler_check(RmfKind::Steinhaus, 200, 3.0, 3.0, 1.0, &spec, 300, 1, 1, t).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.satisfied_with_margin);
        let r = weissler_check(RmfKind::Steinhaus, 200, 1.0, 2.0, 0.0, &spec, 300, 1, 1, t).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.rhs >= 1.0 && r.satisfied_with_margin);
        assert!(matches!(
            weissler_check(RmfKind::Steinhaus, 200, 1.0, 2.0, 0.8, &spec, 300, 1, 1, t),
            Err(Error::Precondition(_))
        ));
        assert!(weissler_check(RmfKind::Steinhaus, 200, 2.0, 1.0, 0.5, &spec, 300, 1, 1, t).is_err());
    }

    #[test]
    fn moment_lemma_examples() {
        let t = table();
        let one = Complex64::new(1.0, 0.0);
        let r = lemma_moment_bound_check(&[(1, one), (2, one), (3, one)], 0, 50, 1, 1, t).unwrap();
        assert_eq!((r.lhs, r.rhs, r.lhs_exact), (1.0, 1.0, Some(1.0)));

        let support: Vec<(u64, Complex64)> = (1..=10).map(|n| (n, one)).collect();
        let r = lemma_moment_bound_check(&support, 1, 200, 1, 1, t).unwrap();
        assert!((r.lhs_exact.unwrap() - harmonic(10)).abs() < 1e-14);
        assert!((r.rhs - harmonic(10)).abs() < 1e-14);

        let r = lemma_moment_bound_check(&[(1, one), (2, one)], 2, 20_000, 1, 1, t).unwrap();
        let exact = r.lhs_exact.unwrap();
        assert!((exact - 3.25).abs() < 1e-14);
        assert!((exact - brute_force_moment(2, 2).unwrap()).abs() < 1e-14);
        assert!((r.rhs - 4.0).abs() < 1e-14);
        assert!((r.lhs - exact).abs() <= 4.0 * r.lhs_stderr);
    }

    #[test]
    fn moment_lemma_bound_holds_for_random_coefficients() {
        let t = table();
        let mut state = 99u64;
        for _ in 0..20 {
            let mut coeffs = Vec::new();
            for n in 1..=12u64 {
                state = crate::seeding::mix64(state);
                if state % 3 != 0 {
                    let re = crate::seeding::unit_f64(state) * 2.0 - 1.0;
                    let im = crate::seeding::unit_f64(crate::seeding::mix64(state)) * 2.0 - 1.0;
                    coeffs.push((n, Complex64::new(re, im)));
                }
            }
            for ell in 1..=2 {
                let r = lemma_moment_bound_check(&coeffs, ell, 10, 1, 1, t).unwrap();
                assert!(r.lhs_exact.unwrap() <= r.rhs * (1.0 + 1e-12));
            }
        }
    }
}
