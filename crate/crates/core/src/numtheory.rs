//! Integer machinery: a smallest-prime-factor sieve and the arithmetic
//! functions built on it (Ω, μ, τ_ℓ, smooth-number counts, divisor sums).

use crate::error::{domain, Error, Result};
use crate::summation::KahanSum;

/// Largest sieve limit accepted by [`FactorTable::new`]. At this size the
/// table holds about 420 MB.
pub const MAX_TABLE_LIMIT: u64 = 100_000_000;

/// Largest number of entries [`enumerate_smooth`] will materialise.
pub const MAX_SMOOTH_ENUMERATION: u64 = 50_000_000;

/// Largest `y` accepted by the smooth-number routines.
pub const MAX_SMOOTHNESS_BOUND: u64 = 10_000_000;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_4;

/// Smallest-prime-factor table for `2..=limit`.
#[derive(Debug, Clone)]
pub struct FactorTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

/// Prime factorisation as `(prime, exponent)` pairs in increasing prime order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pub pairs: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Product of `p^e`; `None` on u64 overflow.
    pub fn value(&self) -> Option<u64> {
        self.pairs.iter().try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?))
    }

    pub fn is_squarefree(&self) -> bool {
        self.pairs.iter().all(|&(_, e)| e == 1)
    }

    pub fn big_omega(&self) -> u32 {
        self.pairs.iter().map(|&(_, e)| e).sum()
    }
}

impl FactorTable {
    /// Linear sieve up to `limit` (inclusive).
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Config(format!("sieve limit {limit} < 2")));
        }
        if limit > MAX_TABLE_LIMIT {
            return Err(Error::Config(format!(
                "sieve limit {limit} exceeds cap {MAX_TABLE_LIMIT}"
            )));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::with_capacity(estimate_prime_count(limit));
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si {
                    break;
                }
                let m = i * p as usize;
                if m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(Self { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes up to the limit, increasing.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `<= x` (x clamped to the limit).
    pub fn primes_up_to(&self, x: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= x);
        &self.primes[..end]
    }

    /// π(x) for `x <= limit`.
    pub fn prime_count(&self, x: u64) -> usize {
        self.primes_up_to(x).len()
    }

    /// Smallest prime factor of `n` for `2 <= n <= limit`.
    #[inline]
    pub fn spf(&self, n: u64) -> u32 {
        self.spf[n as usize]
    }

    /// Raw smallest-prime-factor array (entries 0 and 1 are zero).
    pub fn spf_slice(&self) -> &[u32] {
        &self.spf
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }

    pub fn check_range(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(Error::Range { value: n, min: 1, max: self.limit });
        }
        Ok(())
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check_range(n)?;
        let mut pairs: Vec<(u64, u32)> = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            pairs.push((p, e));
        }
        Ok(Factorization { pairs })
    }

    /// Ω(n): prime factors counted with multiplicity.
    pub fn big_omega(&self, n: u64) -> Result<u32> {
        self.check_range(n)?;
        let mut m = n;
        let mut count = 0;
        while m > 1 {
            m /= self.spf[m as usize] as u64;
            count += 1;
        }
        Ok(count)
    }

    /// Möbius function.
    pub fn mobius(&self, n: u64) -> Result<i8> {
        let f = self.factorize(n)?;
        if !f.is_squarefree() {
            return Ok(0);
        }
        Ok(if f.pairs.len() % 2 == 0 { 1 } else { -1 })
    }

    /// τ_ℓ(n), the number of ordered ℓ-tuples with product `n`.
    pub fn tau_ell(&self, n: u64, ell: u32) -> Result<u64> {
        if ell == 0 {
            return Err(Error::Domain("tau_ell requires ell >= 1".into()));
        }
        let f = self.factorize(n)?;
        f.pairs.iter().try_fold(1u64, |acc, &(_, e)| {
            let b = binomial(ell as u64 + e as u64 - 1, e as u64)?;
            acc.checked_mul(b)
                .ok_or_else(|| Error::Overflow(format!("tau_{ell}({n}) exceeds u64")))
        })
    }

    /// Number of divisors τ(n) = τ₂(n).
    pub fn tau(&self, n: u64) -> Result<u64> {
        let mut m = n;
        self.check_range(n)?;
        let mut count = 1u64;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            count *= e + 1;
        }
        Ok(count)
    }

    /// Exact Σ_{u<n≤v} τ(n)/n with compensated summation.
    pub fn divisor_sum_tau_over_n(&self, u: u64, v: u64) -> Result<f64> {
        if u == 0 || u >= v {
            return domain(format!("divisor sum needs 1 <= u < v, got u={u}, v={v}"));
        }
        self.check_range(v)?;
        let mut acc = KahanSum::new();
        for n in (u + 1)..=v {
            acc.add(self.tau(n)? as f64 / n as f64);
        }
        Ok(acc.value())
    }

    /// Σ_{p≤x} p^{-σ} over sieved primes.
    pub fn prime_power_sum(&self, x: u64, sigma: f64) -> Result<f64> {
        if x < 2 {
            return domain(format!("prime_power_sum needs x >= 2, got {x}"));
        }
        if sigma < 0.0 || !sigma.is_finite() {
            return domain(format!("prime_power_sum needs sigma >= 0, got {sigma}"));
        }
        self.check_range(x)?;
        let acc: KahanSum = self
            .primes_up_to(x)
            .iter()
            .map(|&p| (p as f64).powf(-sigma))
            .sum();
        Ok(acc.value())
    }
}

/// C(n, k) with overflow detection.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n-k+i) / i stays integral at every step.
        acc = acc
            .checked_mul(n as u128 - k as u128 + i)
            .ok_or_else(|| Error::Overflow(format!("C({n},{k}) intermediate exceeds u128")))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow(format!("C({n},{k}) exceeds u64")))
}

/// Upper estimate for π(x), used only to size allocations.
fn estimate_prime_count(x: u64) -> usize {
    if x < 17 {
        return 8;
    }
    let xf = x as f64;
    (1.26 * xf / xf.ln()) as usize + 8
}

/// Primes up to `n` by a plain Eratosthenes sieve, independent of any table.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn smooth_primes(y: u64) -> Result<Vec<u64>> {
    if y < 2 {
        return domain(format!("smoothness bound y={y} < 2"));
    }
    if y > MAX_SMOOTHNESS_BOUND {
        return Err(Error::Capacity(format!(
            "smoothness bound y={y} exceeds {MAX_SMOOTHNESS_BOUND}"
        )));
    }
    Ok(primes_up_to(y))
}

fn count_smooth(x: u64, primes: &[u64]) -> u64 {
    // n = 1 plus, for each admissible smallest prime index, the numbers
    // whose smallest prime is primes[i].
    let mut total = 1;
    for (i, &p) in primes.iter().enumerate() {
        if p > x {
            break;
        }
        total += count_smooth(x / p, &primes[i..]);
    }
    total
}

fn walk_smooth(n: u64, x: u64, primes: &[u64], out: &mut Vec<u64>) {
    out.push(n);
    for (i, &p) in primes.iter().enumerate() {
        match n.checked_mul(p) {
            Some(m) if m <= x => walk_smooth(m, x, &primes[i..], out),
            _ => break,
        }
    }
}

/// Ψ(x, y): integers `1 <= n <= x` whose prime factors are all `<= y`.
pub fn psi_count(x: u64, y: u64) -> Result<u64> {
    if y < 2 {
        return domain(format!("smoothness bound y={y} < 2"));
    }
    if y >= x {
        return Ok(x);
    }
    let primes = smooth_primes(y)?;
    Ok(count_smooth(x, &primes))
}

/// The y-smooth integers up to `x`, increasing.
pub fn enumerate_smooth(x: u64, y: u64) -> Result<Vec<u64>> {
    let count = psi_count(x, y)?;
    if count > MAX_SMOOTH_ENUMERATION {
        return Err(Error::Capacity(format!(
            "Psi({x},{y}) = {count} exceeds enumeration cap {MAX_SMOOTH_ENUMERATION}"
        )));
    }
    let primes = smooth_primes(y.min(x.max(2)))?;
    let mut out = Vec::with_capacity(count as usize);
    if x >= 1 {
        walk_smooth(1, x, &primes, &mut out);
    }
    out.sort_unstable();
    Ok(out)
}

/// Main term (log x)^{π(y)} / (π(y)! ∏_{p≤y} log p) of the smooth-number
/// count for fixed small `y`. No error factor is applied.
pub fn psi_ennola(x: f64, y: u64) -> Result<f64> {
    let primes = smooth_primes(y)?;
    if !(x > 1.0) || (y as f64) > x {
        return domain(format!("psi_ennola needs 2 <= y <= x, got x={x}, y={y}"));
    }
    let k = primes.len();
    let log_factorial: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
    let log_prod_logs: f64 = primes.iter().map(|&p| (p as f64).ln().ln()).sum();
    Ok((k as f64 * x.ln().ln() - log_factorial - log_prod_logs).exp())
}

/// Right-hand side C (log v)^{4/3} (log(v/u))^{2/3} of the uniform divisor-sum bound.
pub fn divisor_envelope(u: f64, v: f64, c: f64) -> Result<f64> {
    if !(u >= 1.0 && u < v) {
        return domain(format!("divisor envelope needs 1 <= u < v, got u={u}, v={v}"));
    }
    Ok(c * v.ln().powf(4.0 / 3.0) * (v / u).ln().powf(2.0 / 3.0))
}

/// D(x) = Σ_{n≤x} τ(n) by the hyperbola method.
pub fn dirichlet_d(x: u64) -> u64 {
    if x == 0 {
        return 0;
    }
    let r = isqrt(x);
    let s: u64 = (1..=r).map(|d| x / d).sum();
    2 * s - r * r
}

/// x log x + (2γ − 1) x.
pub fn dirichlet_d_mainterm(x: f64) -> f64 {
    x * x.ln() + (2.0 * EULER_GAMMA - 1.0) * x
}

pub fn isqrt(x: u64) -> u64 {
    let x = x as u128;
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r as u64
}
