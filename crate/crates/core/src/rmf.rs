//! Seeded Steinhaus and Rademacher random multiplicative functions.
//!
//! The value at a prime `p` is stored as a 64-bit fixed-point phase: the
//! angle is `2π · phase / 2^64`. Phases of composite `n` are accumulated with
//! wrapping integer addition, which is exact modulo one full turn, and only
//! then turned into a complex number. A Rademacher sign is the phase `0`
//! (for +1) or `2^63` (for −1).

use crate::error::{Error, Result};
use crate::numtheory::FactorTable;
use crate::seeding::{keyed, TAG_PRIME};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

const HALF_TURN: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RmfKind {
    Steinhaus,
    Rademacher,
}

impl fmt::Display for RmfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RmfKind::Steinhaus => "steinhaus",
            RmfKind::Rademacher => "rademacher",
        })
    }
}

impl FromStr for RmfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "steinhaus" => Ok(RmfKind::Steinhaus),
            "rademacher" => Ok(RmfKind::Rademacher),
            other => Err(Error::Config(format!("unknown kind {other:?}"))),
        }
    }
}

/// Phase of `f(p)` for the given kind and seed. Depends only on
/// `(kind, seed, p)`.
#[inline]
pub fn prime_phase(kind: RmfKind, seed: u64, p: u64) -> u64 {
    let bits = keyed(seed, TAG_PRIME, p);
    match kind {
        RmfKind::Steinhaus => bits,
        RmfKind::Rademacher => bits & HALF_TURN,
    }
}

/// Angle in `[0, 2π)` of a fixed-point phase.
#[inline]
pub fn phase_angle(phase: u64) -> f64 {
    (phase >> 11) as f64 * (TAU / (1u64 << 53) as f64)
}

/// Complex value of an accumulated phase.
#[inline]
pub fn phase_value(kind: RmfKind, phase: u64) -> Complex64 {
    match kind {
        RmfKind::Steinhaus => {
            let (s, c) = phase_angle(phase).sin_cos();
            Complex64::new(c, s)
        }
        RmfKind::Rademacher => {
            if phase == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        }
    }
}

/// One realisation of `(f(p))_{p ≤ limit}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmfSample {
    kind: RmfKind,
    limit: u64,
    seed: u64,
    /// Phase of f(p) for the i-th prime.
    phases: Vec<u64>,
}

impl RmfSample {
    /// Draws the sample. Extending `limit` never changes values at primes
    /// already covered.
    pub fn new(kind: RmfKind, limit: u64, seed: u64, table: &FactorTable) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Config(format!("sample limit {limit} < 2")));
        }
        if limit > table.limit() {
            return Err(Error::Range { value: limit, min: 2, max: table.limit() });
        }
        let phases = table
            .primes_up_to(limit)
            .iter()
            .map(|&p| prime_phase(kind, seed, p as u64))
            .collect();
        Ok(Self { kind, limit, seed, phases })
    }

    /// Builds a sample from explicit phases (one per prime `<= limit`).
    pub fn from_phases(
        kind: RmfKind,
        limit: u64,
        seed: u64,
        phases: Vec<u64>,
        table: &FactorTable,
    ) -> Result<Self> {
        let expected = table.prime_count(limit.min(table.limit()));
        if limit > table.limit() || phases.len() != expected {
            return Err(Error::Config(format!(
                "expected {expected} phases for limit {limit}, got {}",
                phases.len()
            )));
        }
        if kind == RmfKind::Rademacher && phases.iter().any(|&ph| ph != 0 && ph != HALF_TURN) {
            return Err(Error::Config("Rademacher phases must be 0 or 2^63".into()));
        }
        Ok(Self { kind, limit, seed, phases })
    }

    pub fn kind(&self) -> RmfKind {
        self.kind
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Phases indexed like `table.primes()`.
    pub fn phases(&self) -> &[u64] {
        &self.phases
    }

    fn prime_index(&self, p: u64, table: &FactorTable) -> Result<usize> {
        let primes = table.primes_up_to(self.limit);
        primes
            .binary_search(&(p.min(u32::MAX as u64) as u32))
            .map_err(|_| Error::Domain(format!("{p} is not a prime <= {}", self.limit)))
    }

    /// Phase of `f(p)`.
    pub fn phase(&self, p: u64, table: &FactorTable) -> Result<u64> {
        Ok(self.phases[self.prime_index(p, table)?])
    }

    /// θ_p in `[0, 2π)`; for Rademacher this is 0 or π.
    pub fn angle(&self, p: u64, table: &FactorTable) -> Result<f64> {
        self.phase(p, table).map(phase_angle)
    }

    /// `(p, θ_p)` for every prime up to the limit.
    pub fn angles<'a>(&'a self, table: &'a FactorTable) -> impl Iterator<Item = (u64, f64)> + 'a {
        table
            .primes()
            .iter()
            .zip(&self.phases)
            .map(|(&p, &ph)| (p as u64, phase_angle(ph)))
    }

    /// Accumulated phase of `f(n)`; `None` when `f(n) = 0` (Rademacher,
    /// non-squarefree `n`).
    pub fn phase_of(&self, n: u64, table: &FactorTable) -> Result<Option<u64>> {
        if n > self.limit {
            return Err(Error::Range { value: n, min: 1, max: self.limit });
        }
        let f = table.factorize(n)?;
        if self.kind == RmfKind::Rademacher && !f.is_squarefree() {
            return Ok(None);
        }
        let mut acc = 0u64;
        for &(p, e) in &f.pairs {
            acc = acc.wrapping_add(self.phase(p, table)?.wrapping_mul(e as u64));
        }
        Ok(Some(acc))
    }

    /// `f(n)`.
    pub fn eval(&self, n: u64, table: &FactorTable) -> Result<Complex64> {
        Ok(match self.phase_of(n, table)? {
            Some(ph) => phase_value(self.kind, ph),
            None => Complex64::new(0.0, 0.0),
        })
    }
}

/// Which prime-restricted multiplicative function a handle evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// f_y(p^m) = f(p^m) 1_{p>y}
    LargePrimes,
    /// g_y(p^m) = μ(p^m) f(p^m) 1_{p≤y}
    MobiusSmall,
    /// h_y(p^m) = f(p^m) 1_{p≤y}
    SmallPrimes,
    /// Dirichlet inverse of h_y, supported on y-smooth n. Equals g_y when f
    /// is completely multiplicative (Steinhaus); for Rademacher it is
    /// ∏ (−f(p))^{v_p}.
    SmallInverse,
}

/// A multiplicative function derived from a sample and a split point `y`.
#[derive(Debug, Clone, Copy)]
pub struct RestrictedFn<'a> {
    sample: &'a RmfSample,
    y: u64,
    restriction: Restriction,
}

impl RestrictedFn<'_> {
    pub fn restriction(&self) -> Restriction {
        self.restriction
    }

    pub fn eval(&self, n: u64, table: &FactorTable) -> Result<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        if n > self.sample.limit {
            return Err(Error::Range { value: n, min: 1, max: self.sample.limit });
        }
        let f = table.factorize(n)?;
        let y = self.y;
        let all_small = f.pairs.iter().all(|&(p, _)| p <= y);
        let all_large = f.pairs.iter().all(|&(p, _)| p > y);
        match self.restriction {
            Restriction::LargePrimes if !all_large => Ok(zero),
            Restriction::SmallPrimes if !all_small => Ok(zero),
            Restriction::LargePrimes | Restriction::SmallPrimes => self.sample.eval(n, table),
            Restriction::MobiusSmall => {
                if !all_small || !f.is_squarefree() {
                    return Ok(zero);
                }
                let v = self.sample.eval(n, table)?;
                Ok(if f.pairs.len() % 2 == 0 { v } else { -v })
            }
            Restriction::SmallInverse => {
                if !all_small {
                    return Ok(zero);
                }
                match self.sample.kind {
                    RmfKind::Steinhaus if !f.is_squarefree() => Ok(zero),
                    _ => {
                        let mut acc = 0u64;
                        for &(p, e) in &f.pairs {
                            let neg = self.sample.phase(p, table)?.wrapping_add(HALF_TURN);
                            acc = acc.wrapping_add(neg.wrapping_mul(e as u64));
                        }
                        Ok(phase_value(self.sample.kind, acc))
                    }
                }
            }
        }
    }
}

/// The three handles `f_y`, `g_y`, `h_y`.
#[derive(Debug, Clone, Copy)]
pub struct RestrictedVariants<'a> {
    pub f_y: RestrictedFn<'a>,
    pub g_y: RestrictedFn<'a>,
    pub h_y: RestrictedFn<'a>,
}

impl<'a> RestrictedVariants<'a> {
    /// Dirichlet inverse of `h_y`.
    pub fn h_y_inverse(&self) -> RestrictedFn<'a> {
        RestrictedFn { restriction: Restriction::SmallInverse, ..self.h_y }
    }
}

pub fn restricted_variants(sample: &RmfSample, y: u64) -> Result<RestrictedVariants<'_>> {
    if y < 2 || y > sample.limit {
        return Err(Error::Domain(format!(
            "split point y={y} must satisfy 2 <= y <= {}",
            sample.limit
        )));
    }
    let handle = |restriction| RestrictedFn { sample, y, restriction };
    Ok(RestrictedVariants {
        f_y: handle(Restriction::LargePrimes),
        g_y: handle(Restriction::MobiusSmall),
        h_y: handle(Restriction::SmallPrimes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::replica_seed;
    use std::sync::OnceLock;

    fn table() -> &'static FactorTable {
        static T: OnceLock<FactorTable> = OnceLock::new();
        T.get_or_init(|| FactorTable::new(1_000_000).unwrap())
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn deterministic_and_extension_stable() {
        let t = table();
        let a = RmfSample::new(RmfKind::Steinhaus, 10, 42, t).unwrap();
        let b = RmfSample::new(RmfKind::Steinhaus, 10, 42, t).unwrap();
        assert_eq!(a, b);
        let c = RmfSample::new(RmfKind::Steinhaus, 100, 42, t).unwrap();
        assert_eq!(&c.phases()[..a.phases().len()], a.phases());
        let d = RmfSample::new(RmfKind::Steinhaus, 10, 43, t).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn angles_lie_in_range_and_cosines_average_out() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 1_000_000, 5, t).unwrap();
        let n = s.phases().len() as f64;
        let mut sum = 0.0;
        for (_, theta) in s.angles(t) {
            assert!((0.0..TAU).contains(&theta));
            sum += theta.cos();
        }
        assert!((sum / n).abs() < 4.0 / n.sqrt());
    }

    #[test]
    fn rademacher_values() {
        let t = table();
        let s = RmfSample::new(RmfKind::Rademacher, 1000, 9, t).unwrap();
        let mut plus = 0;
        for (_, theta) in s.angles(t) {
            assert!(theta == 0.0 || theta == std::f64::consts::PI);
            if theta == 0.0 {
                plus += 1;
            }
        }
        assert!(plus > 50 && plus < 118);
        assert_eq!(s.eval(12, t).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(s.eval(1, t).unwrap(), Complex64::new(1.0, 0.0));
        for n in 1..=1000u64 {
            let v = s.eval(n, t).unwrap();
            if t.mobius(n).unwrap() == 0 {
                assert_eq!(v.norm(), 0.0);
            } else {
                assert_eq!(v.im, 0.0);
                assert_eq!(v.re.abs(), 1.0);
            }
        }
    }

    #[test]
    fn steinhaus_eval_examples() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 100, 3, t).unwrap();
        assert_eq!(s.eval(1, t).unwrap(), Complex64::new(1.0, 0.0));
        let th2 = s.angle(2, t).unwrap();
        let th3 = s.angle(3, t).unwrap();
        let expected = Complex64::from_polar(1.0, 2.0 * th2 + th3);
        assert!(close(s.eval(12, t).unwrap(), expected, 1e-14));
        assert!((s.eval(97, t).unwrap().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(s.eval(101, t), Err(Error::Range { .. })));
    }

    #[test]
    fn complete_multiplicativity() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 1_000_000, 77, t).unwrap();
        let mut state = 12345u64;
        for _ in 0..2000 {
            state = crate::seeding::mix64(state);
            let m = 1 + state % 1000;
            let n = 1 + (state >> 20) % 1000;
            let pm = s.phase_of(m, t).unwrap().unwrap();
            let pn = s.phase_of(n, t).unwrap().unwrap();
            // exact in the phase representation
            assert_eq!(s.phase_of(m * n, t).unwrap().unwrap(), pm.wrapping_add(pn));
            let lhs = s.eval(m * n, t).unwrap();
            let rhs = s.eval(m, t).unwrap() * s.eval(n, t).unwrap();
            assert!(close(lhs, rhs, 1e-14));
        }
    }

    #[test]
    fn orthogonality_relations() {
        let t = table();
        let replicas = 4000;
        let mut acc = vec![Complex64::new(0.0, 0.0); 31 * 31];
        for r in 0..replicas {
            let s = RmfSample::new(RmfKind::Steinhaus, 30, replica_seed(11, r), t).unwrap();
            let vals: Vec<Complex64> = (1..=30).map(|n| s.eval(n, t).unwrap()).collect();
            for m in 1..=30 {
                for n in 1..=30 {
                    acc[m * 31 + n] += vals[m - 1] * vals[n - 1].conj();
                }
            }
        }
        let band = 4.0 / (replicas as f64).sqrt();
        for m in 1..=30 {
            for n in 1..=30 {
                let mean = acc[m * 31 + n] / replicas as f64;
                let target = if m == n { 1.0 } else { 0.0 };
                assert!((mean - target).norm() <= band, "m={m} n={n} mean={mean}");
            }
        }
    }

    fn dirichlet_convolution(
        a: &RestrictedFn<'_>,
        b: impl Fn(u64) -> Complex64,
        n: u64,
        t: &FactorTable,
    ) -> Complex64 {
        (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| a.eval(d, t).unwrap() * b(n / d))
            .sum()
    }

    #[test]
    fn restricted_variant_examples() {
        let t = table();
        let s = RmfSample::new(RmfKind::Steinhaus, 1000, 19, t).unwrap();
        let v = restricted_variants(&s, 5).unwrap();
        for n in [1u64, 7, 49, 77, 143, 997] {
            assert_eq!(v.f_y.eval(n, t).unwrap(), s.eval(n, t).unwrap());
        }
        assert_eq!(v.f_y.eval(14, t).unwrap(), Complex64::new(0.0, 0.0));
        for p in [2u64, 3, 5] {
            assert_eq!(v.g_y.eval(p, t).unwrap(), -s.eval(p, t).unwrap());
            assert_eq!(v.g_y.eval(p * p, t).unwrap(), Complex64::new(0.0, 0.0));
            assert_eq!(v.h_y.eval(p * p, t).unwrap(), s.eval(p * p, t).unwrap());
        }
        assert_eq!(v.g_y.eval(7, t).unwrap(), Complex64::new(0.0, 0.0));
        let support = (1..=1000u64).filter(|&n| v.g_y.eval(n, t).unwrap().norm() > 0.0).count();
        assert_eq!(support, 8);
        assert!(restricted_variants(&s, 1).is_err());
        assert!(restricted_variants(&s, 1001).is_err());
    }

    #[test]
    fn convolution_identities_hold_exactly() {
        let t = table();
        for seed in 0..4u64 {
            for &y in &[2u64, 3, 7] {
                let s = RmfSample::new(RmfKind::Steinhaus, 1000, seed, t).unwrap();
                let v = restricted_variants(&s, y).unwrap();
                for n in 1..=1000u64 {
                    let f = s.eval(n, t).unwrap();
                    let hf = dirichlet_convolution(&v.h_y, |m| v.f_y.eval(m, t).unwrap(), n, t);
                    assert!(close(hf, f, 1e-12), "f = h*f_y fails at n={n}");
                    let gf = dirichlet_convolution(&v.g_y, |m| s.eval(m, t).unwrap(), n, t);
                    assert!(close(gf, v.f_y.eval(n, t).unwrap(), 1e-12), "f_y = g*f fails at n={n}");
                }
            }
        }
    }

    #[test]
    fn rademacher_inverse_of_small_part() {
        let t = table();
        let s = RmfSample::new(RmfKind::Rademacher, 1000, 23, t).unwrap();
        let v = restricted_variants(&s, 3).unwrap();
        let inv = v.h_y_inverse();
        for n in 1..=1000u64 {
            // h_y^{-1} * f = f_y
            let lhs = dirichlet_convolution(&inv, |m| s.eval(m, t).unwrap(), n, t);
            assert!(close(lhs, v.f_y.eval(n, t).unwrap(), 1e-12), "n={n}");
            // f = h_y * f_y holds for Rademacher too
            let hf = dirichlet_convolution(&v.h_y, |m| v.f_y.eval(m, t).unwrap(), n, t);
            assert!(close(hf, s.eval(n, t).unwrap(), 1e-12));
        }
        // g_y * f differs from f_y at p^2 for Rademacher
        let gf = dirichlet_convolution(&v.g_y, |m| s.eval(m, t).unwrap(), 4, t);
        assert_eq!(gf, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn from_phases_validates() {
        let t = table();
        assert!(RmfSample::from_phases(RmfKind::Steinhaus, 10, 0, vec![0; 4], t).is_ok());
        assert!(RmfSample::from_phases(RmfKind::Steinhaus, 10, 0, vec![0; 3], t).is_err());
        assert!(RmfSample::from_phases(RmfKind::Rademacher, 10, 0, vec![1; 4], t).is_err());
        assert_eq!("Steinhaus".parse::<RmfKind>().unwrap(), RmfKind::Steinhaus);
        assert!("gauss".parse::<RmfKind>().is_err());
    }
}
