use serde::{Deserialize, Serialize};

use super::run_replicates;
use super::trial::{generate_period, Scenario};
use crate::domain::Effect;
use crate::error::{Error, Result};
use crate::statistics::period_statistics;

/// Empirical covariance of per-period statistics for one effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementMatrix {
    pub effect: Effect,
    pub cov: Vec<Vec<f64>>,
    /// Monte Carlo standard error of each entry.
    pub se: Vec<Vec<f64>>,
}

impl IncrementMatrix {
    fn from_samples(effect: Effect, samples: &[Vec<f64>]) -> Self {
        let looks = samples[0].len();
        let n = samples.len() as f64;
        let means: Vec<f64> = (0..looks).map(|s| samples.iter().map(|x| x[s]).sum::<f64>() / n).collect();
        let mut cov = vec![vec![0.0; looks]; looks];
        let mut se = vec![vec![0.0; looks]; looks];
        for s in 0..looks {
            for t in 0..looks {
                let products: Vec<f64> = samples.iter().map(|x| (x[s] - means[s]) * (x[t] - means[t])).collect();
                let c = products.iter().sum::<f64>() / (n - 1.0);
                let spread = products.iter().map(|p| (p - c).powi(2)).sum::<f64>() / (n - 1.0);
                cov[s][t] = c;
                se[s][t] = (spread / n).sqrt();
            }
        }
        Self { effect, cov, se }
    }

    pub fn max_abs_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (s, row) in self.cov.iter().enumerate() {
            for (t, c) in row.iter().enumerate() {
                if s != t {
                    worst = worst.max(c.abs());
                }
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.cov.len()).map(|s| self.cov[s][s]).collect()
    }
}

/// Covariance of per-period selection and preference statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementCheck {
    pub nsim: u64,
    /// Replicates where some period lacked data for a statistic.
    pub dropped: u64,
    /// Off-diagonal tolerance `4 / sqrt(nsim)`.
    pub threshold: f64,
    pub matrices: Vec<IncrementMatrix>,
}

impl IncrementCheck {
    pub const DIAGONAL_RANGE: (f64, f64) = (0.9, 1.1);

    pub fn off_diagonal_ok(&self) -> bool {
        self.matrices.iter().all(|m| m.max_abs_off_diagonal() < self.threshold)
    }

    pub fn diagonal_ok(&self) -> bool {
        let (lo, hi) = Self::DIAGONAL_RANGE;
        self.matrices.iter().all(|m| m.diagonal().iter().all(|d| (lo..=hi).contains(d)))
    }

    pub fn passed(&self) -> bool {
        self.off_diagonal_ok() && self.diagonal_ok()
    }
}

/// Generates every period of `nsim` trials without stopping and estimates
/// the covariance of the per-period statistics across replicates.
pub fn verify_increments(scenario: &Scenario, nsim: u64, seed: u64, workers: usize) -> Result<IncrementCheck> {
    let looks = scenario.looks();
    let outcome = scenario.effects.outcome;
    let draws = run_replicates(nsim, seed, workers, |rng| {
        (0..looks)
            .map(|l| period_statistics(&generate_period(rng, scenario, l), outcome).map(|s| (s.t_nu, s.t_pi)))
            .collect::<Result<Vec<_>>>()
            .ok()
    })?;
    let kept: Vec<Vec<(f64, f64)>> = draws.into_iter().flatten().collect();
    if kept.len() < 2 {
        return Err(Error::InsufficientData("fewer than two replicates had data in every period".into()));
    }
    let nu: Vec<Vec<f64>> = kept.iter().map(|r| r.iter().map(|p| p.0).collect()).collect();
    let pi: Vec<Vec<f64>> = kept.iter().map(|r| r.iter().map(|p| p.1).collect()).collect();
    Ok(IncrementCheck {
        nsim,
        dropped: nsim - kept.len() as u64,
        threshold: 4.0 / (nsim as f64).sqrt(),
        matrices: vec![
            IncrementMatrix::from_samples(Effect::Selection, &nu),
            IncrementMatrix::from_samples(Effect::Preference, &pi),
        ],
    })
}
