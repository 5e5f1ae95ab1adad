//! Replica fan-out shared by the Monte Carlo estimators.

use crate::error::Result;
use crate::numtheory::FactorTable;
use crate::parallel::map_indexed;
use crate::partial_sum::{partial_sum, WeightSpec};
use crate::rmf::{RmfKind, RmfSample};
use crate::seeding::replica_seed;
use num_complex::Complex64;

/// Applies `f` to `replicas` independent samples. Replica `i` uses the seed
/// `replica_seed(seed, i)`; results come back in replica order.
pub fn map_replicas<T, F>(
    kind: RmfKind,
    limit: u64,
    replicas: u64,
    seed: u64,
    width: usize,
    table: &FactorTable,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&RmfSample) -> Result<T> + Sync + Send,
{
    let limit = limit.max(2);
    map_indexed(width, replicas, |i| {
        let sample = RmfSample::new(kind, limit, replica_seed(seed, i), table)?;
        f(&sample)
    })
}

/// `M(T)` under `spec` for each replica.
pub fn replica_sums(
    kind: RmfKind,
    t: u64,
    spec: &WeightSpec,
    replicas: u64,
    seed: u64,
    width: usize,
    table: &FactorTable,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    map_replicas(kind, t, replicas, seed, width, table, |s| partial_sum(s, t, spec, table))
}

/// `|M(T)|` for each replica.
pub fn replica_abs(
    kind: RmfKind,
    t: u64,
    spec: &WeightSpec,
    replicas: u64,
    seed: u64,
    width: usize,
    table: &FactorTable,
) -> Result<Vec<f64>> {
    Ok(replica_sums(kind, t, spec, replicas, seed, width, table)?
        .into_iter()
        .map(|z| z.norm())
        .collect())
}
