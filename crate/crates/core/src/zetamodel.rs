//! Euler products of random multiplicative functions, Parseval's identity
//! for finite Dirichlet series, and the prime statistic `Σ_T`.

use crate::error::{domain, Error, Result};
use crate::numtheory::FactorTable;
use crate::parallel::map_indexed;
use crate::quadrature::{integrate, integrate_panels, QuadratureSpec};
use crate::rmf::{phase_angle, prime_phase, RmfKind, RmfSample};
use crate::seeding::{keyed, replica_seed, unit_f64, TAG_COEFFICIENT};
use crate::stats::{ks_statistic, mean_stderr, normal_cdf, sample_variance};
use crate::summation::{ComplexKahanSum, KahanSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerProductSpec {
    pub prime_cutoff: u64,
    pub s: Complex64,
    /// `false` evaluates `∏ (1 − p^{−s})^{−1}` without the random factors.
    pub include_f: bool,
}

impl EulerProductSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.s.re > 0.0 && self.s.re.is_finite() && self.s.im.is_finite()) {
            return domain(format!("Euler product needs Re s > 0, got s={}", self.s));
        }
        if self.prime_cutoff < 2 {
            return Err(Error::Config(format!("prime cutoff {} < 2", self.prime_cutoff)));
        }
        Ok(())
    }
}

/// `p^{−s}`.
fn prime_power(p: u64, s: Complex64) -> Complex64 {
    let lp = (p as f64).ln();
    Complex64::from_polar((-s.re * lp).exp(), -s.im * lp)
}

/// `Σ −log(1 − c_p p^{−s})` with principal logarithms, over the given
/// `(p, c_p)` pairs.
pub fn euler_log_from_values(values: &[(u64, Complex64)], s: Complex64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return domain(format!("Euler product needs Re s > 0, got s={s}"));
    }
    let mut acc = ComplexKahanSum::new();
    for &(p, c) in values {
        acc.add(-(Complex64::new(1.0, 0.0) - c * prime_power(p, s)).ln());
    }
    Ok(acc.value())
}

/// `(p, f(p))` for primes `p ≤ P`, or `(p, 1)` when `include_f` is off.
fn prime_values(sample: &RmfSample, spec: &EulerProductSpec, table: &FactorTable) -> Result<Vec<(u64, Complex64)>> {
    if spec.prime_cutoff > sample.limit() {
        return Err(Error::Range { value: spec.prime_cutoff, min: 2, max: sample.limit() });
    }
    table
        .primes_up_to(spec.prime_cutoff)
        .iter()
        .map(|&p| {
            let p = p as u64;
            let c = if spec.include_f { sample.eval(p, table)? } else { Complex64::new(1.0, 0.0) };
            Ok((p, c))
        })
        .collect()
}

/// `log ∏_{p≤P} (1 − f(p) p^{−s})^{−1}` as a sum of principal logarithms.
pub fn euler_product_log(sample: &RmfSample, spec: &EulerProductSpec, table: &FactorTable) -> Result<Complex64> {
    spec.validate()?;
    euler_log_from_values(&prime_values(sample, spec, table)?, spec.s)
}

/// `∏_{p≤P} (1 − f(p) p^{−s})^{−1}`, evaluated in log space.
pub fn euler_product_eval(sample: &RmfSample, spec: &EulerProductSpec, table: &FactorTable) -> Result<Complex64> {
    Ok(euler_product_log(sample, spec, table)?.exp())
}

/// The same product by direct complex multiplication of the factors.
pub fn euler_product_direct(sample: &RmfSample, spec: &EulerProductSpec, table: &FactorTable) -> Result<Complex64> {
    spec.validate()?;
    let mut prod = Complex64::new(1.0, 0.0);
    for (p, c) in prime_values(sample, spec, table)? {
        prod /= Complex64::new(1.0, 0.0) - c * prime_power(p, spec.s);
    }
    Ok(prod)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Truncation point of the quadrature; beyond it the integral is summed
    /// analytically.
    pub tau: f64,
}

/// `∫_1^∞ |Σ_{n≤x} a_n|² x^{−1−2σ} dx` exactly: the partial sum is constant
/// between consecutive support points.
pub fn parseval_lhs(coefficients: &[(u64, Complex64)], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("Parseval needs sigma > 0, got {sigma}"));
    }
    let merged = merge_support(coefficients)?;
    let two_sigma = 2.0 * sigma;
    let mut acc = KahanSum::new();
    let mut partial = Complex64::new(0.0, 0.0);
    for (i, &(n, a)) in merged.iter().enumerate() {
        partial += a;
        let lo = (n as f64).powf(-two_sigma);
        let hi = merged.get(i + 1).map_or(0.0, |&(m, _)| (m as f64).powf(-two_sigma));
        acc.add(partial.norm_sqr() * (lo - hi) / two_sigma);
    }
    Ok(acc.value())
}

fn merge_support(coefficients: &[(u64, Complex64)]) -> Result<Vec<(u64, Complex64)>> {
    if coefficients.iter().any(|&(n, _)| n == 0) {
        return domain("Dirichlet coefficients must be indexed by n >= 1");
    }
    let mut merged: Vec<(u64, Complex64)> = coefficients.to_vec();
    merged.sort_by_key(|&(n, _)| n);
    merged.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    Ok(merged)
}

/// `∫_τ^∞ e^{iωt} dt/(σ² + t²)` by its asymptotic expansion in `1/(ωτ)`,
/// stopped at the smallest term.
fn oscillatory_tail(omega: f64, sigma: f64, tau: f64) -> Complex64 {
    // g^{(k)}(τ) = (−1)^k k!/(2iσ) [(τ − iσ)^{−k−1} − (τ + iσ)^{−k−1}]
    let i = Complex64::new(0.0, 1.0);
    let minus = 1.0 / Complex64::new(tau, -sigma);
    let plus = 1.0 / Complex64::new(tau, sigma);
    let io = i * omega;
    let mut pow_minus = minus;
    let mut pow_plus = plus;
    let mut fact = 1.0;
    let mut io_pow = io;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 0..200u32 {
        if k > 0 {
            fact *= k as f64;
            pow_minus *= minus;
            pow_plus *= plus;
            io_pow *= io;
        }
        // (−1)^k g^{(k)} = k!/(2iσ)[…]; the two signs cancel.
        let gk = fact * (pow_minus - pow_plus) / (2.0 * i * sigma);
        let term = gk / io_pow;
        let size = term.norm();
        if size > last || size == 0.0 {
            break;
        }
        sum += term;
        last = size;
        if size < 1e-300 || size <= 1e-18 * sum.norm() {
            break;
        }
    }
    -Complex64::from_polar(1.0, omega * tau) * sum
}

/// `(1/2π) ∫_ℝ |A(σ+it)|²/|σ+it|² dt` for `A(s) = Σ a_n n^{−s}`: adaptive
/// quadrature of the directly evaluated polynomial on `[−τ, τ]`, plus the
/// two tails summed analytically term by term.
pub fn parseval_rhs(coefficients: &[(u64, Complex64)], sigma: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("Parseval needs sigma > 0, got {sigma}"));
    }
    let merged = merge_support(coefficients)?;
    let logs: Vec<f64> = merged.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let weights: Vec<Complex64> = merged.iter().zip(&logs).map(|(&(_, a), &l)| a * (-sigma * l).exp()).collect();

    let omega_min = logs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let omega_max = logs.last().copied().unwrap_or(0.0) - logs.first().copied().unwrap_or(0.0);
    let tau = if omega_min.is_finite() { (50.0 / omega_min).max(200.0) } else { 200.0 };

    let integrand = |t: f64| {
        let mut a = Complex64::new(0.0, 0.0);
        for (w, &l) in weights.iter().zip(&logs) {
            a += w * Complex64::from_polar(1.0, -t * l);
        }
        a.norm_sqr() / (sigma * sigma + t * t)
    };
    let panels = ((2.0 * tau * omega_max / PI).ceil() as u64).max(8);
    let core = integrate_panels(integrand, -tau, tau, panels, quad).value;

    let diag: f64 = weights.iter().map(|w| w.norm_sqr()).sum::<KahanSum>().value();
    let mut tail = KahanSum::new();
    tail.add(2.0 * diag * (FRAC_PI_2 - (tau / sigma).atan()) / sigma);
    for m in 0..weights.len() {
        for n in m + 1..weights.len() {
            // a_m ā_n (mn)^{−σ} e^{it log(n/m)} and its conjugate partner;
            // over both tails each integrates to 2 Re I(ω)
            let c = weights[m] * weights[n].conj();
            let tail_n = oscillatory_tail(logs[n] - logs[m], sigma, tau);
            tail.add(4.0 * c.re * tail_n.re);
        }
    }
    Ok(((core + tail.value()) / (2.0 * PI), tau))
}

/// Relative gap between the two sides of Parseval's identity.
pub fn parseval_residual(coefficients: &[(u64, Complex64)], sigma: f64, quad: &QuadratureSpec) -> Result<ParsevalReport> {
    let lhs = parseval_lhs(coefficients, sigma)?;
    let (rhs, tau) = parseval_rhs(coefficients, sigma, quad)?;
    Ok(ParsevalReport { lhs, rhs, residual: (lhs - rhs).abs() / (lhs.abs() + 1e-300), tau })
}

/// Coefficients `a_n` on `n = 1..=size` with real and imaginary parts
/// uniform in `[−1, 1)`, derived from `seed`.
pub fn random_coefficients(seed: u64, size: u64) -> Vec<(u64, Complex64)> {
    (1..=size)
        .map(|n| {
            let re = 2.0 * unit_f64(keyed(seed, TAG_COEFFICIENT, 2 * n)) - 1.0;
            let im = 2.0 * unit_f64(keyed(seed, TAG_COEFFICIENT, 2 * n + 1)) - 1.0;
            (n, Complex64::new(re, im))
        })
        .collect()
}

/// Coefficient of `cos θ_p` in `Σ_T`:
/// `2 p^{−1/2−2 log₂T/log T} (log T/log p) sin(log p/(2 log T))`.
pub fn sigma_t_coefficient(t: f64, p: u64) -> f64 {
    let l = t.ln();
    let ll = l.ln();
    let lp = (p as f64).ln();
    2.0 * (-(0.5 + 2.0 * ll / l) * lp).exp() * (l / lp) * (lp / (2.0 * l)).sin()
}

fn check_sigma_t(t: u64) -> Result<()> {
    if t < 16 {
        return domain(format!("Sigma_T needs T >= 16, got {t}"));
    }
    Ok(())
}

/// `(p, coefficient)` over primes `p ≤ min(P, T)`.
pub fn sigma_t_coefficients(t: u64, prime_cutoff: u64, table: &FactorTable) -> Result<Vec<(u64, f64)>> {
    check_sigma_t(t)?;
    let top = t.min(prime_cutoff);
    table.check_range(top.max(2))?;
    Ok(table.primes_up_to(top).iter().map(|&p| (p as u64, sigma_t_coefficient(t as f64, p as u64))).collect())
}

/// `Σ_T` over primes `p ≤ min(P, T)` with `θ_p` the angle of `f(p)`.
pub fn sigma_t_truncated(sample: &RmfSample, t: u64, prime_cutoff: u64, table: &FactorTable) -> Result<f64> {
    let coeffs = sigma_t_coefficients(t, prime_cutoff, table)?;
    let mut acc = KahanSum::new();
    for (p, c) in coeffs {
        acc.add(c * sample.angle(p, table)?.cos());
    }
    Ok(acc.value())
}

pub fn sigma_t(sample: &RmfSample, t: u64, table: &FactorTable) -> Result<f64> {
    sigma_t_truncated(sample, t, t, table)
}

/// `E Σ_T² = Σ_p c_p²/2` over primes `p ≤ min(P, T)`.
pub fn sigma_t_variance_truncated(t: u64, prime_cutoff: u64, table: &FactorTable) -> Result<f64> {
    let coeffs = sigma_t_coefficients(t, prime_cutoff, table)?;
    Ok(coeffs.iter().map(|&(_, c)| 0.5 * c * c).sum::<KahanSum>().value())
}

pub fn sigma_t_variance_exact(t: u64, table: &FactorTable) -> Result<f64> {
    sigma_t_variance_truncated(t, t, table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub t: u64,
    pub replicas: u64,
    pub seed: u64,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub predicted_var: f64,
    pub ks_statistic: f64,
    /// Raw `Σ_T` per replica, in replica order.
    pub values: Vec<f64>,
}

/// Steinhaus replicas of `Σ_T`, normalised by the exact standard deviation
/// and compared with the standard normal. Replica `i` uses the same prime
/// values as `RmfSample::new(Steinhaus, T, replica_seed(seed, i))`.
pub fn sigma_t_clt_experiment(t: u64, replicas: u64, seed: u64, width: usize, table: &FactorTable) -> Result<CltReport> {
    if replicas < 2 {
        return Err(Error::Config(format!("need at least 2 replicas, got {replicas}")));
    }
    let coeffs = sigma_t_coefficients(t, t, table)?;
    let predicted_var = coeffs.iter().map(|&(_, c)| 0.5 * c * c).sum::<KahanSum>().value();
    let values = map_indexed(width, replicas, |i| {
        let s = replica_seed(seed, i);
        let mut acc = KahanSum::new();
        for &(p, c) in &coeffs {
            acc.add(c * phase_angle(prime_phase(RmfKind::Steinhaus, s, p)).cos());
        }
        Ok(acc.value())
    })?;
    let (sample_mean, _) = mean_stderr(&values);
    let sample_var = sample_variance(&values);
    let sd = predicted_var.sqrt();
    let normalized: Vec<f64> = values.iter().map(|v| v / sd).collect();
    let ks = ks_statistic(&normalized, normal_cdf);
    Ok(CltReport { t, replicas, seed, sample_mean, sample_var, predicted_var, ks_statistic: ks, values })
}

/// `|log T ∫_{−1/(2 log T)}^{1/(2 log T)} cos(θ − t log p) dt − 2 (log T/log p) sin(log p/(2 log T)) cos θ|`.
pub fn quadrature_identity_residual(t: f64, p: u64, theta: f64) -> Result<f64> {
    if !(t >= 3.0) || p < 2 || p as f64 > t {
        return domain(format!("quadrature identity needs 2 <= p <= T and T >= 3, got p={p}, T={t}"));
    }
    let l = t.ln();
    let lp = (p as f64).ln();
    let h = 1.0 / (2.0 * l);
    let spec = QuadratureSpec { rel_tol: 1e-14, abs_tol: 1e-16, max_depth: 30 };
    let lhs = l * integrate(|u| (theta - u * lp).cos(), -h, h, &spec).value;
    let rhs = 2.0 * (l / lp) * (lp / (2.0 * l)).sin() * theta.cos();
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn table() -> &'static FactorTable {
        static T: OnceLock<FactorTable> = OnceLock::new();
        T.get_or_init(|| FactorTable::new(1_000_000).unwrap())
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn single_factor_products() {
        let t = table();
        let sample = RmfSample::new(RmfKind::Steinhaus, 10, 4, t).unwrap();
        let spec = EulerProductSpec { prime_cutoff: 2, s: Complex64::new(1.0, 0.0), include_f: false };
        assert!((euler_product_eval(&sample, &spec, t).unwrap() - 2.0).norm() < 1e-15);
        let sigma = 0.7;
        let spec = EulerProductSpec { prime_cutoff: 2, s: Complex64::new(sigma, 0.0), include_f: true };
        let f2 = sample.eval(2, t).unwrap();
        let expected = 1.0 / (one() - f2 * 2f64.powf(-sigma));
        assert!((euler_product_eval(&sample, &spec, t).unwrap() - expected).norm() < 1e-14);
        let bad = EulerProductSpec { prime_cutoff: 2, s: Complex64::new(0.0, 1.0), include_f: true };
        assert!(matches!(euler_product_eval(&sample, &bad, t), Err(Error::Domain(_))));
    }

    #[test]
    fn log_space_matches_direct_product() {
        let t = table();
        let big_t: f64 = 1e6;
        let sigma = 0.5 + 2.0 * big_t.ln().ln() / big_t.ln();
        for seed in 0..20 {
            for kind in [RmfKind::Steinhaus, RmfKind::Rademacher] {
                let sample = RmfSample::new(kind, 100, seed, t).unwrap();
                for im in [0.0, 3.7, -41.0] {
                    let spec = EulerProductSpec { prime_cutoff: 100, s: Complex64::new(sigma, im), include_f: true };
                    let a = euler_product_eval(&sample, &spec, t).unwrap();
                    let b = euler_product_direct(&sample, &spec, t).unwrap();
                    assert!((a.norm() / b.norm() - 1.0).abs() < 1e-12);
                    assert!((a - b).norm() < 1e-12 * b.norm());
                }
            }
        }
    }

    #[test]
    fn zero_angles_reduce_to_plain_product() {
        let t = table();
        let sample = RmfSample::from_phases(RmfKind::Steinhaus, 1000, 0, vec![0; t.prime_count(1000)], t).unwrap();
        for im in [0.0, 14.1] {
            let with = EulerProductSpec { prime_cutoff: 1000, s: Complex64::new(0.6, im), include_f: true };
            let without = EulerProductSpec { include_f: false, ..with };
            assert_eq!(euler_product_eval(&sample, &with, t).unwrap(), euler_product_eval(&sample, &without, t).unwrap());
        }
    }

    #[test]
    fn parseval_single_term() {
        let quad = QuadratureSpec::default();
        for sigma in [0.25, 0.5, 1.0, 2.0, 3.3] {
            let r = parseval_residual(&[(1, one())], sigma, &quad).unwrap();
            assert!((r.lhs - 0.5 / sigma).abs() < 1e-15);
            assert!((r.rhs - 0.5 / sigma).abs() < 1e-10, "{r:?}");
        }
        assert!(parseval_residual(&[(1, one())], -1.0, &quad).is_err());
        assert!(parseval_residual(&[(1, one())], 0.0, &quad).is_err());
    }

    #[test]
    fn parseval_lhs_by_hand() {
        // a = 1 at n = 1, 2 with σ = ½: ∫_1^2 dx/x² + 4 ∫_2^∞ dx/x² = ½ + 2
        let got = parseval_lhs(&[(1, one()), (2, one())], 0.5).unwrap();
        assert!((got - 2.5).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_tail_against_quadrature() {
        let quad = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-18, max_depth: 40 };
        let (omega, sigma, tau) = (0.7, 0.5, 200.0);
        // truncate at a zero of both cos and sin envelopes far out; the
        // remaining piece is bounded by 2/(ω t_end²)
        let t_end = tau + 2.0 * PI / omega * 20_000.0;
        let panels = 40_000;
        let re = integrate_panels(|t| (omega * t).cos() / (sigma * sigma + t * t), tau, t_end, panels, &quad).value;
        let im = integrate_panels(|t| (omega * t).sin() / (sigma * sigma + t * t), tau, t_end, panels, &quad).value;
        let far = oscillatory_tail(omega, sigma, t_end);
        let got = oscillatory_tail(omega, sigma, tau);
        assert!((got - (Complex64::new(re, im) + far)).norm() < 1e-12, "{got} vs {re} {im}");
    }

    #[test]
    fn parseval_battery() {
        let quad = QuadratureSpec::default();
        for size in [1u64, 2, 5, 20] {
            let coeffs = random_coefficients(11, size);
            for sigma in [0.25, 0.5, 1.0, 2.0] {
                let r = parseval_residual(&coeffs, sigma, &quad).unwrap();
                assert!(r.residual <= 1e-6, "size={size} sigma={sigma} {r:?}");
            }
        }
        let five: Vec<(u64, Complex64)> = (1..=5).map(|n| (n, one())).collect();
        assert!(parseval_residual(&five, 0.5, &quad).unwrap().residual <= 1e-6);
    }

    #[test]
    fn sigma_t_single_prime() {
        let t = table();
        let big_t = 1000u64;
        let sample = RmfSample::new(RmfKind::Steinhaus, big_t, 9, t).unwrap();
        let l = (big_t as f64).ln();
        let ll = l.ln();
        let c = 2.0 * 2f64.powf(-0.5 - 2.0 * ll / l) * (l / 2f64.ln()) * (2f64.ln() / (2.0 * l)).sin();
        let got = sigma_t_truncated(&sample, big_t, 2, t).unwrap();
        assert!((got - c * sample.angle(2, t).unwrap().cos()).abs() < 1e-15);
        let var = sigma_t_variance_truncated(big_t, 2, t).unwrap();
        assert!((var - 0.5 * c * c).abs() < 1e-15);
        assert!(sigma_t(&sample, 15, t).is_err());
    }

    #[test]
    fn sigma_t_mean_and_sample_path_agree() {
        let t = table();
        let report = sigma_t_clt_experiment(10_000, 2000, 3, 1, t).unwrap();
        let bound = 4.0 * (report.predicted_var / 2000.0).sqrt();
        assert!(report.sample_mean.abs() <= bound);
        let sample = RmfSample::new(RmfKind::Steinhaus, 10_000, replica_seed(3, 17), t).unwrap();
        assert!((sigma_t(&sample, 10_000, t).unwrap() - report.values[17]).abs() < 1e-12);
        let again = sigma_t_clt_experiment(10_000, 2000, 3, 2, t).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn quadrature_identity() {
        assert!(quadrature_identity_residual(100.0, 2, FRAC_PI_2).unwrap() <= 1e-10);
        assert!(quadrature_identity_residual(100.0, 2, 0.0).unwrap() <= 1e-10);
        for (tt, p, th) in [(1e6, 997u64, 1.1), (50.0, 47, -2.0), (3.0, 3, 0.4)] {
            assert!(quadrature_identity_residual(tt, p, th).unwrap() <= 1e-10);
        }
        assert!(quadrature_identity_residual(10.0, 11, 0.0).is_err());
        // closed form / cos θ → 1 as T grows with p fixed
        let mut prev = f64::INFINITY;
        for e in [2.0, 4.0, 8.0, 16.0, 32.0] {
            let l = 10f64.powf(e).ln();
            let ratio = 2.0 * (l / 2f64.ln()) * (2f64.ln() / (2.0 * l)).sin();
            let gap = (1.0 - ratio).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-4);
    }
}
