//! The `verify-all` battery: every identity and inequality of the crate,
//! checked at small scale, one JSON line per check.

use super::output::jsonl;
use crate::error::Result;
use crate::extremes::max_over_replicas;
use crate::moments::{brute_force_moment, exact_moment_integer_k, lemma_moment_bound_check, mc_moment, weissler_check};
use crate::montecarlo::replica_abs;
use crate::numtheory::{dirichlet_d, divisor_envelope, psi_count, FactorTable};
use crate::partial_sum::{convolution_identity_residual, harmonic, WeightSpec};
use crate::quadrature::QuadratureSpec;
use crate::rmf::{RmfKind, RmfSample};
use crate::seeding::{replica_seed, trial_seed};
use crate::tails::{curve_from_pool, laplace_duality_residual, TailPool};
use crate::zetamodel::{
    euler_product_eval, parseval_residual, quadrature_identity_residual, random_coefficients,
    sigma_t_clt_experiment, EulerProductSpec,
};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: &'static str,
    pub passed: bool,
    /// The measured quantity; passing means `value <= bound`.
    pub value: f64,
    pub bound: f64,
}

fn at_most(check: &'static str, value: f64, bound: f64) -> Check {
    Check { check, passed: value <= bound, value, bound }
}

/// Runs the battery. Results depend on `seed` only, never on `width`.
pub fn battery(seed: u64, width: usize) -> Result<Vec<Check>> {
    let table = FactorTable::new(20_000)?;
    let spec = WeightSpec::default();
    let mut out = Vec::new();
    let sub = |i: u64| trial_seed(seed, i);

    let e = mc_moment(RmfKind::Steinhaus, 100, 1.0, &spec, 2000, sub(0), width, &table)?;
    out.push(at_most("second_moment_orthogonality", (e.mean - harmonic(100)).abs() / e.stderr, 4.0));

    let mut worst: f64 = 0.0;
    for k in 1..=3u32 {
        let t_top = if k == 3 { 6 } else { 12 };
        for t in 1..=t_top {
            worst = worst.max((exact_moment_integer_k(t, k)? - brute_force_moment(t, k)?).abs());
        }
    }
    out.push(at_most("exact_vs_brute_force_moment", worst, 1e-12));
    let spot = (exact_moment_integer_k(3, 1)? - 11.0 / 6.0).abs().max((exact_moment_integer_k(2, 2)? - 3.25).abs());
    out.push(at_most("exact_moment_spot_values", spot, 1e-15));

    let e = mc_moment(RmfKind::Steinhaus, 50, 2.0, &spec, 4000, sub(1), width, &table)?;
    out.push(at_most("fourth_moment_mc_vs_exact", (e.mean - exact_moment_integer_k(50, 2)?).abs() / e.stderr, 4.0));

    let r = weissler_check(RmfKind::Steinhaus, 100, 3.0, 3.0, 1.0, &spec, 200, sub(2), width, &table)?;
    out.push(at_most("weissler_equality_case", (r.lhs - r.rhs).abs(), 0.0));
    let mut gap = f64::NEG_INFINITY;
    for (i, &(p, q)) in [(1.0, 2.0), (2.0, 4.0), (1.5, 3.5)].iter().enumerate() {
        let rho: f64 = (p / q as f64).sqrt();
        let r = weissler_check(RmfKind::Steinhaus, 100, p, q, rho, &spec, 1000, sub(3 + i as u64), width, &table)?;
        gap = gap.max(r.lhs - r.rhs);
    }
    out.push(at_most("weissler_point_estimates", gap, 0.0));

    let one = Complex64::new(1.0, 0.0);
    let lemma = lemma_moment_bound_check(&[(1, one), (2, one), (3, one), (6, one)], 2, 50, sub(6), width, &table)?;
    out.push(at_most("moment_lemma_exact_lhs_minus_rhs", lemma.lhs_exact.unwrap_or(f64::INFINITY) - lemma.rhs, 0.0));

    let pool = replica_abs(RmfKind::Steinhaus, 100, &spec, 500, sub(7), width, &table)?;
    let mut dual: f64 = 0.0;
    for k in [0.5, 1.0, 2.0] {
        dual = dual.max(laplace_duality_residual(&pool, k)?);
    }
    out.push(at_most("laplace_duality_residual", dual, 1e-9));
    let grid: Vec<f64> = (0..30).map(|i| -2.0 + 0.15 * i as f64).collect();
    let curve = curve_from_pool(&TailPool::new(pool)?, 100, &grid, sub(7));
    let rises = curve.phi_hat.windows(2).filter(|w| w[1] > w[0]).count();
    out.push(at_most("tail_curve_monotone_violations", rises as f64, 0.0));

    let quad = QuadratureSpec::default();
    let mut pars: f64 = 0.0;
    for size in [1, 2, 5] {
        for sigma in [0.5, 1.0] {
            pars = pars.max(parseval_residual(&random_coefficients(sub(8), size), sigma, &quad)?.residual);
        }
    }
    out.push(at_most("parseval_residual", pars, 1e-6));

    let clt = sigma_t_clt_experiment(1000, 500, sub(9), width, &table)?;
    out.push(at_most("sigma_t_mean", clt.sample_mean.abs() / (clt.predicted_var / 500.0).sqrt(), 4.0));

    let mut quad_id: f64 = 0.0;
    for (t, p, th) in [(100.0, 2, 0.0), (100.0, 97, 1.0), (1e4, 13, 2.5)] {
        quad_id = quad_id.max(quadrature_identity_residual(t, p, th)?);
    }
    out.push(at_most("quadrature_identity_residual", quad_id, 1e-10));

    let mut ratio: f64 = 0.0;
    for (u, v) in [(1u64, 10u64), (10, 100), (100, 20_000), (1, 20_000), (5000, 5001)] {
        let s = table.divisor_sum_tau_over_n(u, v)?;
        ratio = ratio.max(s / divisor_envelope(u as f64, v as f64, 4.0)?);
    }
    out.push(at_most("divisor_lemma_ratio", ratio, 1.0));
    out.push(at_most("dirichlet_d_4_minus_8", (dirichlet_d(4) as f64 - 8.0).abs(), 0.0));
    out.push(at_most("psi_30_3_minus_12", (psi_count(30, 3)? as f64 - 12.0).abs(), 0.0));

    let mut conv: f64 = 0.0;
    for i in 0..5 {
        for kind in [RmfKind::Steinhaus, RmfKind::Rademacher] {
            let sample = RmfSample::new(kind, 100, replica_seed(sub(10), i), &table)?;
            for y in [2, 3, 5] {
                for t in [10, 100] {
                    conv = conv.max(convolution_identity_residual(&sample, y, t, &table)?);
                }
            }
        }
    }
    out.push(at_most("convolution_identity_residual", conv, 1e-9));

    let zero = RmfSample::from_phases(RmfKind::Steinhaus, 100, 0, vec![0; table.prime_count(100)], &table)?;
    let with = EulerProductSpec { prime_cutoff: 100, s: Complex64::new(0.6, 7.0), include_f: true };
    let without = EulerProductSpec { include_f: false, ..with };
    let diff = (euler_product_eval(&zero, &with, &table)? - euler_product_eval(&zero, &without, &table)?).norm();
    out.push(at_most("euler_zero_angles_difference", diff, 0.0));

    let a = max_over_replicas(RmfKind::Steinhaus, 200, 300, sub(11), 1, &table)?;
    let b = max_over_replicas(RmfKind::Steinhaus, 200, 300, sub(11), width.max(2), &table)?;
    let half = max_over_replicas(RmfKind::Steinhaus, 200, 150, sub(11), width, &table)?;
    out.push(at_most("extremes_width_dependence", (a.0 - b.0).abs() + (a.1 as f64 - b.1 as f64).abs(), 0.0));
    out.push(at_most("extremes_prefix_excess", half.0 - a.0, 0.0));
    Ok(out)
}

pub fn render(checks: &[Check]) -> Result<String> {
    jsonl(checks)
}
