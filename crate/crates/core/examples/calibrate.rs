//! Prints the quantities that the acceptance suite freezes as regression
//! values. Run with `cargo run --release --example calibrate`.

use rmf_lab::extremes::{as_growth_experiment, extreme_trials, SampleMode, FULL_MODE_MAX_T};
use rmf_lab::moments::exact_moment_integer_k;
use rmf_lab::numtheory::{divisor_envelope, psi_count, psi_ennola, FactorTable};
use rmf_lab::seeding::replica_seed;
use rmf_lab::zetamodel::{sigma_t_clt_experiment, sigma_t_variance_exact};
use rmf_lab::RmfKind;

/// Base seed shared with the acceptance suite.
const SEED: u64 = 0x5eed_2024;

fn main() -> rmf_lab::Result<()> {
    for t in [100u64, 1000, 10_000] {
        let m = exact_moment_integer_k(t, 2)?;
        let ll = (t as f64).ln().ln();
        println!("fourth moment T={t}: {m} log/loglog={}", m.ln() / ll);
    }

    let table = FactorTable::new(1_000_000)?;
    let var = sigma_t_variance_exact(1_000_000, &table)?;
    let half_ll = 0.5 * 1e6f64.ln().ln();
    println!("Sigma_T variance {var} half loglog {half_ll} gap {}", (var - half_ll).abs());
    let clt = sigma_t_clt_experiment(1_000_000, 5000, SEED, 1, &table)?;
    println!(
        "Sigma_T clt mean {} var {} ks {}",
        clt.sample_mean, clt.sample_var, clt.ks_statistic
    );

    let mut worst: f64 = 0.0;
    for (u, v) in divisor_grid() {
        let s = table.divisor_sum_tau_over_n(u, v)?;
        worst = worst.max(s / divisor_envelope(u as f64, v as f64, 1.0)?);
    }
    println!("divisor sum / envelope(C=1) max {worst}");

    for y in [3u64, 5] {
        for x in [1_000_000u64, 100_000_000] {
            let ratio = psi_count(x, y)? as f64 / psi_ennola(x as f64, y)?;
            let scale = (y * y) as f64 / ((x as f64).ln() * (y as f64).ln());
            println!("psi x={x} y={y}: ratio-1 {} scale {scale} C {}", ratio - 1.0, (ratio - 1.0).abs() / scale);
        }
    }

    let small = FactorTable::new(1000)?;
    let trials = extreme_trials(RmfKind::Steinhaus, 1000, SampleMode::Full, 20, SEED, 0.5, FULL_MODE_MAX_T, 1, &small)?;
    let below = trials.iter().filter(|t| t.below_threshold).count();
    println!("extremes below fgh(0.5): {below}/20");
    for t in &trials {
        println!("  trial max {} threshold {}", t.max_abs, t.threshold);
    }

    let seeds: Vec<u64> = (0..10).map(|i| replica_seed(SEED, i)).collect();
    let rows = as_growth_experiment(RmfKind::Steinhaus, &seeds, 1_000_000, 0.25, 1.0, 1, &table)?;
    for r in &rows {
        println!("growth seed {:#x}: upper {:?} at {} lower {:?} at {}", r.seed, r.upper_stat, r.upper_argmax, r.lower_stat, r.lower_argmax);
    }
    Ok(())
}

fn divisor_grid() -> Vec<(u64, u64)> {
    let mut g = Vec::new();
    for &v in &[100u64, 1000, 10_000, 100_000, 1_000_000] {
        for &frac in &[0.0, 0.5, 0.9, 0.99] {
            let u = ((v as f64) * frac).max(1.0) as u64;
            g.push((u, v));
        }
    }
    g
}
