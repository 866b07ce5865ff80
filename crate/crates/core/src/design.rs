//! A complete group sequential design: boundaries, inflation and sizes.

use serde::{Deserialize, Serialize};

use crate::boundaries::{
    compute_boundaries, crossing_probabilities, fixed_design_drift_sq, inflation_factor_for, BoundarySet,
};
use crate::domain::{DesignParams, EffectSpec};
use crate::error::{Error, Result};
use crate::samplesize::{build_plan, fixed_n_raw, SampleSizePlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub params: DesignParams,
    pub effects: EffectSpec,
    pub fixed_n_raw: f64,
    pub fixed_n: u64,
    pub inflation: f64,
    pub plan: SampleSizePlan,
    pub bounds: BoundarySet,
}

impl Design {
    pub fn build(params: DesignParams, effects: EffectSpec) -> Result<Self> {
        params.validate()?;
        let bounds = compute_boundaries(params.spending, params.alpha, &params.info_fractions)?;
        Self::from_boundaries(params, effects, bounds)
    }

    /// Sizes a design around precomputed boundaries.
    pub fn from_boundaries(params: DesignParams, effects: EffectSpec, bounds: BoundarySet) -> Result<Self> {
        let inflation = inflation_factor_for(&bounds, params.power, 1.0)?;
        Self::from_parts(params, effects, bounds, inflation)
    }

    /// Sizes a design around precomputed boundaries and inflation factor,
    /// which depend only on the spending family, alpha, power and schedule.
    pub fn from_parts(params: DesignParams, effects: EffectSpec, bounds: BoundarySet, inflation: f64) -> Result<Self> {
        params.validate()?;
        if bounds.info_fractions.as_slice() != params.info_fractions.as_slice() {
            return Err(Error::invalid("info_fractions", "boundaries were computed for another schedule"));
        }
        let fixed_n_raw = fixed_n_raw(params.effect, &effects, params.theta, params.phi, params.alpha, params.power)?;
        let fixed_n = (fixed_n_raw - 1e-9).ceil().max(1.0) as u64;
        let plan = build_plan(fixed_n, inflation, &params.info_fractions)?;
        Ok(Self { params, effects, fixed_n_raw, fixed_n, inflation, plan, bounds })
    }

    /// Score drift per unit information fraction when the design effect is
    /// true: `sqrt(IF) (z_{1-α/2} + z_{1-β})`.
    pub fn design_drift(&self) -> f64 {
        let zz = fixed_design_drift_sq(self.params.alpha, self.params.power).expect("validated params");
        (self.inflation * zz).sqrt()
    }

    /// Normal-theory probability of stopping at each analysis under the
    /// design alternative.
    pub fn stopping_probabilities(&self) -> Vec<f64> {
        crossing_probabilities(&self.bounds, self.design_drift()).stopping_distribution()
    }

    /// Normal-theory expected total enrolled under the design alternative.
    pub fn expected_n(&self) -> f64 {
        self.stopping_probabilities()
            .iter()
            .zip(&self.plan.per_analysis_n)
            .map(|(p, &n)| p * n as f64)
            .sum()
    }
}
