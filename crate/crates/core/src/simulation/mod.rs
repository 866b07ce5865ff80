//! Seeded, parallel Monte Carlo evaluation of group sequential designs.

mod increments;
mod rng;
mod summary;
mod sweep;
mod trial;

pub use increments::{verify_increments, IncrementCheck, IncrementMatrix};
pub use rng::replicate_rng;
pub use summary::SimSummary;
pub use sweep::{sweep, SweepGrid, SweepRow};
pub use trial::{generate_period, simulate_trial, Hypothesis, Scenario, TrialResult, MIN_CELL_COUNT};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs `f` for replicates `0..nsim` on `workers` threads, returning results
/// in replicate order.
pub(crate) fn run_replicates<T, F>(nsim: u64, seed: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> T + Sync,
{
    if nsim == 0 {
        return Err(Error::invalid("nsim", "must be at least 1"));
    }
    if workers == 0 {
        return Err(Error::invalid("workers", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(|| (0..nsim).into_par_iter().map(|i| f(&mut replicate_rng(seed, i))).collect()))
}

/// Simulates `nsim` trials. Replicate `i` uses `replicate_rng(seed, i)`, so
/// the summary is identical for every worker count.
pub fn run_monte_carlo(scenario: &Scenario, nsim: u64, seed: u64, workers: usize) -> Result<SimSummary> {
    let trials = run_replicates(nsim, seed, workers, |rng| simulate_trial(rng, scenario))?;
    Ok(SimSummary::from_trials(&trials, scenario.looks(), scenario.plan.fixed_n, scenario.plan.max_n))
}
