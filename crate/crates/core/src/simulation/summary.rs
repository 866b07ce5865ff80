use serde::{Deserialize, Serialize};

use super::trial::TrialResult;

/// Operating characteristics over a set of simulated trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub nsim: u64,
    pub fixed_n: u64,
    pub max_n: u64,
    pub avg_n: f64,
    pub sd_n: f64,
    /// `avg_n / fixed_n`.
    pub ratio_to_fixed: f64,
    pub reject_rate: f64,
    pub reject_rate_mc_se: f64,
    pub stop_prob_per_analysis: Vec<f64>,
    /// Skipped looks as a fraction of all looks reached.
    pub skip_rate: f64,
}

impl SimSummary {
    pub fn from_trials(trials: &[TrialResult], looks: usize, fixed_n: u64, max_n: u64) -> Self {
        let nsim = trials.len() as u64;
        let n = nsim as f64;
        let mut stops = vec![0u64; looks];
        let (mut sum, mut rejected, mut skipped, mut reached) = (0.0, 0u64, 0usize, 0usize);
        for t in trials {
            sum += t.n_at_stop as f64;
            rejected += t.rejected as u64;
            stops[t.stopped_at - 1] += 1;
            skipped += t.skipped_looks;
            reached += t.z_path.len();
        }
        let avg_n = sum / n;
        let sd_n = if nsim > 1 {
            let ss: f64 = trials.iter().map(|t| (t.n_at_stop as f64 - avg_n).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let reject_rate = rejected as f64 / n;
        Self {
            nsim,
            fixed_n,
            max_n,
            avg_n,
            sd_n,
            ratio_to_fixed: avg_n / fixed_n as f64,
            reject_rate,
            reject_rate_mc_se: (reject_rate * (1.0 - reject_rate) / n).sqrt(),
            stop_prob_per_analysis: stops.iter().map(|&s| s as f64 / n).collect(),
            skip_rate: if reached > 0 { skipped as f64 / reached as f64 } else { 0.0 },
        }
    }
}
