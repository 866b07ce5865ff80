use serde::{Deserialize, Serialize};

use super::run_monte_carlo;
use super::summary::SimSummary;
use super::trial::{Hypothesis, Scenario};
use crate::boundaries::{compute_boundaries, inflation_factor_for, BoundarySet};
use crate::design::Design;
use crate::domain::{DesignParams, EffectSpec, SpendingFamily};
use crate::error::{Error, Result};

/// Cartesian grid around a base design. An empty list keeps the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub params: DesignParams,
    pub effects: EffectSpec,
    pub phis: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Values of the tested effect.
    pub sizes: Vec<f64>,
    pub families: Vec<SpendingFamily>,
    pub hypothesis: Hypothesis,
}

impl SweepGrid {
    pub fn single(params: DesignParams, effects: EffectSpec, hypothesis: Hypothesis) -> Self {
        Self { params, effects, phis: vec![], thetas: vec![], sizes: vec![], families: vec![], hypothesis }
    }

    fn or_base<T: Copy>(list: &[T], base: T) -> Vec<T> {
        if list.is_empty() {
            vec![base]
        } else {
            list.to_vec()
        }
    }

    /// Parameter combinations in output order: φ, then θ, then size, then
    /// family varying fastest.
    pub fn cells(&self) -> Vec<(DesignParams, EffectSpec)> {
        let effect = self.params.effect;
        let mut out = Vec::new();
        for phi in Self::or_base(&self.phis, self.params.phi) {
            for theta in Self::or_base(&self.thetas, self.params.theta) {
                for size in Self::or_base(&self.sizes, self.effects.target(effect)) {
                    for family in Self::or_base(&self.families, self.params.spending) {
                        let params = DesignParams { phi, theta, spending: family, ..self.params.clone() };
                        out.push((params, self.effects.with_target(effect, size)));
                    }
                }
            }
        }
        out
    }
}

/// One grid cell: its parameters, and either a summary or the error that
/// prevented one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub phi: f64,
    pub theta: f64,
    pub d_tau: f64,
    pub d_nu: f64,
    pub d_pi: f64,
    pub family: SpendingFamily,
    pub fixed_n: Option<u64>,
    pub max_n: Option<u64>,
    pub seed: u64,
    pub nsim: u64,
    pub summary: Option<SimSummary>,
    pub error: Option<String>,
}

/// Simulates every grid cell. Cell `k` uses seed `seed + k`.
pub fn sweep(grid: &SweepGrid, nsim: u64, seed: u64, workers: usize) -> Result<Vec<SweepRow>> {
    if nsim == 0 {
        return Err(Error::invalid("nsim", "must be at least 1"));
    }
    let mut cache: Vec<(SpendingFamily, Result<(BoundarySet, f64)>)> = Vec::new();
    let mut rows = Vec::new();
    for (k, (params, effects)) in grid.cells().into_iter().enumerate() {
        let family = params.spending;
        if !cache.iter().any(|(f, _)| *f == family) {
            let built = compute_boundaries(family, params.alpha, &params.info_fractions)
                .and_then(|b| inflation_factor_for(&b, params.power, 1.0).map(|f| (b, f)));
            cache.push((family, built));
        }
        let family_design = &cache.iter().find(|(f, _)| *f == family).unwrap().1;
        let cell_seed = seed.wrapping_add(k as u64);
        let s = effects.sizes;
        let mut row = SweepRow {
            phi: params.phi,
            theta: params.theta,
            d_tau: s.delta_tau,
            d_nu: s.delta_nu,
            d_pi: s.delta_pi,
            family,
            fixed_n: None,
            max_n: None,
            seed: cell_seed,
            nsim,
            summary: None,
            error: None,
        };
        let outcome = family_design
            .clone()
            .and_then(|(b, inflation)| Design::from_parts(params, effects, b, inflation))
            .and_then(|design| {
                row.fixed_n = Some(design.fixed_n);
                row.max_n = Some(design.plan.max_n);
                let scenario = Scenario::new(&design, grid.hypothesis)?;
                run_monte_carlo(&scenario, nsim, cell_seed, workers)
            });
        match outcome {
            Ok(summary) => row.summary = Some(summary),
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    Ok(rows)
}
