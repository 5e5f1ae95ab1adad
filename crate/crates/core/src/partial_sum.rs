//! Streaming evaluation of the weighted partial sums
//! `M_f(T) = Σ_{n≤T} f(n) n^{-1/2}` and their restricted/damped variants.

use crate::error::{Error, Result};
use crate::numtheory::{enumerate_smooth, FactorTable};
use crate::rmf::{phase_value, restricted_variants, RmfKind, RmfSample};
use crate::summation::{ComplexKahanSum, KahanSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Beyond this many terms block maxima are taken on a stride subgrid.
pub const BLOCK_MAX_EXACT_LIMIT: u64 = 10_000_000;

/// Term weights: `f(n) ρ^{Ω(n)} n^{-1/2-δ}`, optionally restricted to
/// `Y`-smooth or squarefree `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub rho: f64,
    pub smooth_cutoff: Option<u64>,
    pub squarefree_only: bool,
    pub sigma_shift: f64,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self { rho: 1.0, smooth_cutoff: None, squarefree_only: false, sigma_shift: 0.0 }
    }
}

impl WeightSpec {
    pub fn with_rho(rho: f64) -> Self {
        Self { rho, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("rho must be finite and >= 0, got {}", self.rho)));
        }
        if !(self.sigma_shift >= 0.0 && self.sigma_shift.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_shift must be finite and >= 0, got {}",
                self.sigma_shift
            )));
        }
        if let Some(y) = self.smooth_cutoff {
            if y < 2 {
                return Err(Error::Config(format!("smooth cutoff {y} < 2")));
            }
        }
        Ok(())
    }
}

/// Visits `(n, term_n)` for `n = 1..=t`, skipping terms that vanish.
///
/// Multiplicative data is built by one pass over the smallest-prime-factor
/// table: `phase(n) = phase(n/p) + phase(p)` with `p = spf(n)`.
pub(crate) fn for_each_term<F>(
    sample: &RmfSample,
    t: u64,
    spec: &WeightSpec,
    table: &FactorTable,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(u64, Complex64),
{
    spec.validate()?;
    if t == 0 || t > sample.limit() {
        return Err(Error::Range { value: t, min: 1, max: sample.limit() });
    }
    let kind = sample.kind();
    let n_max = t as usize;
    let spf = table.spf_slice();
    let prime_phases = sample.phases();
    let need_sqfree = kind == RmfKind::Rademacher || spec.squarefree_only;
    let need_lpf = spec.smooth_cutoff.is_some_and(|y| y < t);

    let mut phase = vec![0u64; n_max + 1];
    let mut omega = vec![0u8; n_max + 1];
    let mut sqfree = if need_sqfree { vec![true; n_max + 1] } else { Vec::new() };
    let mut lpf = if need_lpf { vec![1u32; n_max + 1] } else { Vec::new() };

    let mut rho_pow = [0.0f64; 64];
    rho_pow[0] = 1.0;
    for i in 1..64 {
        rho_pow[i] = rho_pow[i - 1] * spec.rho;
    }
    let shift = spec.sigma_shift;
    let cutoff = spec.smooth_cutoff.unwrap_or(u64::MAX);
    let weight = |n: usize| {
        if shift == 0.0 {
            1.0 / (n as f64).sqrt()
        } else {
            (n as f64).powf(-0.5 - shift)
        }
    };

    visit(1, Complex64::new(1.0, 0.0));
    let mut prime_idx = 0usize;
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let m = n / p;
        let pp = if p == n {
            let ph = prime_phases[prime_idx];
            prime_idx += 1;
            ph
        } else {
            // phase of p equals phase(p) stored at index p
            phase[p]
        };
        phase[n] = phase[m].wrapping_add(pp);
        omega[n] = omega[m] + 1;
        if need_sqfree {
            sqfree[n] = sqfree[m] && m % p != 0;
        }
        if need_lpf {
            lpf[n] = lpf[m].max(p as u32);
        }

        if need_sqfree && !sqfree[n] {
            continue;
        }
        if need_lpf && lpf[n] as u64 > cutoff {
            continue;
        }
        let w = rho_pow[omega[n] as usize];
        if w == 0.0 {
            continue;
        }
        visit(n as u64, phase_value(kind, phase[n]) * (w * weight(n)));
    }
    Ok(())
}

/// `Σ_{n≤T} f(n) ρ^{Ω(n)} n^{-1/2-δ}` over admissible `n`.
pub fn partial_sum(
    sample: &RmfSample,
    t: u64,
    spec: &WeightSpec,
    table: &FactorTable,
) -> Result<Complex64> {
    let mut acc = ComplexKahanSum::new();
    for_each_term(sample, t, spec, table, |_, z| acc.add(z))?;
    Ok(acc.value())
}

/// `M(t)` for every `t = 1..=T` (index 0 holds `M(0) = 0`).
pub fn prefix_sums(
    sample: &RmfSample,
    t: u64,
    spec: &WeightSpec,
    table: &FactorTable,
) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); t as usize + 1];
    let mut acc = ComplexKahanSum::new();
    let mut last = 0usize;
    for_each_term(sample, t, spec, table, |n, z| {
        let n = n as usize;
        let current = acc.value();
        for slot in &mut out[last + 1..n] {
            *slot = current;
        }
        acc.add(z);
        out[n] = acc.value();
        last = n;
    })?;
    let current = acc.value();
    for slot in &mut out[last + 1..] {
        *slot = current;
    }
    Ok(out)
}

/// Checkpointed values of one realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub checkpoints: Vec<u64>,
    pub values: Vec<Complex64>,
    /// Entry `j` is `max |M(t) − M(T_j)|` over `t ∈ (T_j, T_{j+1}]`.
    /// Empty unless block maxima were requested.
    pub block_maxima: Vec<f64>,
    /// Spacing of the `t` grid used for block maxima (1 means every integer).
    pub block_stride: u64,
}

struct CheckpointTracker<'c> {
    checkpoints: &'c [u64],
    with_block_maxima: bool,
    stride: u64,
    next: usize,
    anchor: Complex64,
    block_max: f64,
    values: Vec<Complex64>,
    block_maxima: Vec<f64>,
}

impl CheckpointTracker<'_> {
    /// Records every checkpoint `<= upto`; the partial sum equals `current`
    /// on the whole stretch since the last term.
    fn close_through(&mut self, upto: u64, current: Complex64) {
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] <= upto {
            if self.with_block_maxima && self.next > 0 {
                self.block_max = self.block_max.max((current - self.anchor).norm());
                self.block_maxima.push(self.block_max);
            }
            self.values.push(current);
            self.anchor = current;
            self.block_max = 0.0;
            self.next += 1;
        }
    }

    fn observe(&mut self, n: u64, current: Complex64) {
        if self.with_block_maxima
            && self.next > 0
            && self.next < self.checkpoints.len()
            && (n % self.stride == 0 || self.checkpoints[self.next] == n)
        {
            self.block_max = self.block_max.max((current - self.anchor).norm());
        }
    }
}

pub fn trajectory(
    sample: &RmfSample,
    checkpoints: &[u64],
    spec: &WeightSpec,
    table: &FactorTable,
    with_block_maxima: bool,
) -> Result<Trajectory> {
    if checkpoints.is_empty() {
        return Err(Error::Config("trajectory needs at least one checkpoint".into()));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("checkpoints must be positive and strictly increasing".into()));
    }
    let t_max = *checkpoints.last().unwrap();
    let stride = t_max.div_ceil(BLOCK_MAX_EXACT_LIMIT).max(1);
    let mut tracker = CheckpointTracker {
        checkpoints,
        with_block_maxima,
        stride,
        next: 0,
        anchor: Complex64::new(0.0, 0.0),
        block_max: 0.0,
        values: Vec::with_capacity(checkpoints.len()),
        block_maxima: Vec::with_capacity(checkpoints.len().saturating_sub(1)),
    };
    let mut acc = ComplexKahanSum::new();
    for_each_term(sample, t_max, spec, table, |n, z| {
        tracker.close_through(n - 1, acc.value());
        acc.add(z);
        tracker.observe(n, acc.value());
    })?;
    tracker.close_through(t_max, acc.value());
    debug_assert_eq!(tracker.values.len(), checkpoints.len());
    Ok(Trajectory {
        seed: sample.seed(),
        checkpoints: checkpoints.to_vec(),
        values: tracker.values,
        block_maxima: tracker.block_maxima,
        block_stride: stride,
    })
}

/// `|M_{f_y}(T) − Σ_{n≤T} c(n) n^{-1/2} M_f(⌊T/n⌋)|` where `c` is the
/// Dirichlet inverse of `h_y` (equal to `g_y` for Steinhaus samples).
pub fn convolution_identity_residual(
    sample: &RmfSample,
    y: u64,
    t: u64,
    table: &FactorTable,
) -> Result<f64> {
    if y < 2 || y > t || t > sample.limit() {
        return Err(Error::Domain(format!(
            "convolution identity needs 2 <= y <= T <= {}, got y={y}, T={t}",
            sample.limit()
        )));
    }
    let variants = restricted_variants(sample, y)?;

    let mut lhs = ComplexKahanSum::new();
    for n in 1..=t {
        let v = variants.f_y.eval(n, table)?;
        if v.norm_sqr() > 0.0 {
            lhs.add(v / (n as f64).sqrt());
        }
    }
    let lhs = lhs.value();

    let prefix = prefix_sums(sample, t, &WeightSpec::default(), table)?;
    let inverse = variants.h_y_inverse();
    let mut rhs = ComplexKahanSum::new();
    for n in enumerate_smooth(t, y)? {
        let c = inverse.eval(n, table)?;
        if c.norm_sqr() > 0.0 {
            rhs.add(c / (n as f64).sqrt() * prefix[(t / n) as usize]);
        }
    }
    Ok((lhs - rhs.value()).norm())
}

/// `(log T)^{1/2+ε}`, the almost-sure upper-bound scale.
pub fn upper_normalizer(t: f64, eps: f64) -> f64 {
    t.ln().powf(0.5 + eps)
}

/// `exp(L √(log log T))`, the omega-bound scale. NaN for `T <= e`.
pub fn lower_normalizer(t: f64, l: f64) -> f64 {
    let ll = t.ln().ln();
    if ll > 0.0 {
        (l * ll.sqrt()).exp()
    } else {
        f64::NAN
    }
}

/// Σ_{n≤T} 1/n.
pub fn harmonic(t: u64) -> f64 {
    (1..=t).map(|n| 1.0 / n as f64).sum::<KahanSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::replica_seed;
    use std::sync::OnceLock;

    fn table() -> &'static FactorTable {
        static T: OnceLock<FactorTable> = OnceLock::new();
        T.get_or_init(|| FactorTable::new(100_000).unwrap())
    }

    fn from_scratch(s: &RmfSample, t: u64, spec: &WeightSpec, tab: &FactorTable) -> Complex64 {
        let mut acc = ComplexKahanSum::new();
        for n in 1..=t {
            let f = tab.factorize(n).unwrap();
            if spec.squarefree_only && !f.is_squarefree() {
                continue;
            }
            if let Some(y) = spec.smooth_cutoff {
                if f.pairs.iter().any(|&(p, _)| p > y) {
                    continue;
                }
            }
            let w = spec.rho.powi(f.big_omega() as i32) * (n as f64).powf(-0.5 - spec.sigma_shift);
            acc.add(s.eval(n, tab).unwrap() * w);
        }
        acc.value()
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * (1.0 + b.norm())
    }

    #[test]
    fn small_t_examples() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 1000, 8, t).unwrap();
        let specs = [
            WeightSpec::default(),
            WeightSpec::with_rho(0.3),
            WeightSpec { smooth_cutoff: Some(3), squarefree_only: true, sigma_shift: 0.2, rho: 2.0 },
        ];
        for spec in &specs {
            assert_eq!(partial_sum(&s, 1, spec, t).unwrap(), Complex64::new(1.0, 0.0));
        }
        let m2 = partial_sum(&s, 2, &WeightSpec::default(), t).unwrap();
        let expected = 1.0 + s.eval(2, t).unwrap() / 2f64.sqrt();
        assert!(close(m2, expected, 1e-15));
        assert!(matches!(
            partial_sum(&s, 1001, &WeightSpec::default(), t),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn streaming_matches_from_scratch() {
        let t = table();
        for kind in [RmfKind::Steinhaus, RmfKind::Rademacher] {
            let s = RmfSample::new(kind, 5000, 31, t).unwrap();
            let specs = [
                WeightSpec::default(),
                WeightSpec::with_rho(0.7),
                WeightSpec { rho: 0.9, smooth_cutoff: Some(7), squarefree_only: false, sigma_shift: 0.0 },
                WeightSpec { rho: 1.0, smooth_cutoff: None, squarefree_only: true, sigma_shift: 0.1 },
            ];
            for spec in &specs {
                for &tt in &[1u64, 2, 17, 500, 5000] {
                    let a = partial_sum(&s, tt, spec, t).unwrap();
                    let b = from_scratch(&s, tt, spec, t);
                    assert!(close(a, b, 1e-12), "{kind} T={tt} {spec:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rho_zero_keeps_only_first_term() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 1000, 2, t).unwrap();
        assert_eq!(partial_sum(&s, 1000, &WeightSpec::with_rho(0.0), t).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn smooth_cutoff_above_t_is_unrestricted() {
        let t = table();
        let s = RmfSample::new(RmfKind::Rademacher, 1000, 2, t).unwrap();
        let plain = partial_sum(&s, 700, &WeightSpec::default(), t).unwrap();
        let spec = WeightSpec { smooth_cutoff: Some(700), ..WeightSpec::default() };
        assert_eq!(partial_sum(&s, 700, &spec, t).unwrap(), plain);
        let spec = WeightSpec { smooth_cutoff: Some(5000), ..WeightSpec::default() };
        assert_eq!(partial_sum(&s, 700, &spec, t).unwrap(), plain);
    }

    #[test]
    fn trajectory_examples() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 1000, 4, t).unwrap();
        let spec = WeightSpec::default();
        let tr = trajectory(&s, &[1], &spec, t, true).unwrap();
        assert_eq!(tr.values, vec![Complex64::new(1.0, 0.0)]);
        assert!(tr.block_maxima.is_empty());

        let tr = trajectory(&s, &[10, 100], &spec, t, false).unwrap();
        assert!(close(tr.values[0], partial_sum(&s, 10, &spec, t).unwrap(), 1e-12));
        assert!(close(tr.values[1], partial_sum(&s, 100, &spec, t).unwrap(), 1e-12));

        let tr = trajectory(&s, &[1, 2], &spec, t, true).unwrap();
        assert!((tr.block_maxima[0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(tr.block_stride, 1);

        assert!(matches!(trajectory(&s, &[10, 5], &spec, t, true), Err(Error::Config(_))));
        assert!(matches!(trajectory(&s, &[], &spec, t, true), Err(Error::Config(_))));
    }

    #[test]
    fn block_maxima_match_brute_force() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 20_000, 12, t).unwrap();
        let spec = WeightSpec::default();
        let checkpoints = [3u64, 16, 50, 51, 999, 20_000];
        let tr = trajectory(&s, &checkpoints, &spec, t, true).unwrap();
        let prefix = prefix_sums(&s, 20_000, &spec, t).unwrap();
        for j in 1..checkpoints.len() {
            let (a, b) = (checkpoints[j - 1] as usize, checkpoints[j] as usize);
            let brute = (a + 1..=b).map(|u| (prefix[u] - prefix[a]).norm()).fold(0.0, f64::max);
            assert!((tr.block_maxima[j - 1] - brute).abs() < 1e-12, "block {j}");
        }
        for (cp, v) in checkpoints.iter().zip(&tr.values) {
            let scratch = from_scratch(&s, *cp, &spec, t);
            assert!(close(*v, scratch, 1e-10));
        }
    }

    #[test]
    fn second_moment_is_harmonic_number() {
        let t = table();
        let replicas = 2000u64;
        let vals: Vec<f64> = (0..replicas)
            .map(|r| {
                let s = RmfSample::new(RmfKind::Steinhaus, 1000, replica_seed(5, r), t).unwrap();
                partial_sum(&s, 1000, &WeightSpec::default(), t).unwrap().norm_sqr()
            })
            .collect();
        let n = replicas as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let h = harmonic(1000);
        assert!((h - 7.485_470_860_550_345).abs() < 1e-12);
        assert!((mean - h).abs() <= 4.0 * (var / n).sqrt(), "mean {mean} vs {h}");
    }

    #[test]
    fn convolution_identity_examples() {
        let t = table();
        for seed in 0..50u64 {
            let s = RmfSample::new(RmfKind::Steinhaus, 1000, seed, t).unwrap();
            assert!(convolution_identity_residual(&s, 2, 10, t).unwrap() <= 1e-9);
            assert!(convolution_identity_residual(&s, 3, 100, t).unwrap() <= 1e-9);
            assert!(convolution_identity_residual(&s, 50, 50, t).unwrap() <= 1e-9);
        }
        let s = RmfSample::new(RmfKind::Rademacher, 1000, 1, t).unwrap();
        assert!(convolution_identity_residual(&s, 5, 1000, t).unwrap() <= 1e-9);
        assert!(convolution_identity_residual(&s, 5, 4, t).is_err());
    }

    #[test]
    fn prefix_sums_are_consistent() {
        let t = table();
        let s = RmfSample::new(RmfKind::Rademacher, 300, 6, t).unwrap();
        let spec = WeightSpec::default();
        let prefix = prefix_sums(&s, 300, &spec, t).unwrap();
        assert_eq!(prefix[0], Complex64::new(0.0, 0.0));
        for tt in [1u64, 4, 9, 100, 300] {
            assert!(close(prefix[tt as usize], partial_sum(&s, tt, &spec, t).unwrap(), 1e-14));
        }
    }
}
