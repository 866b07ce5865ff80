use rand::Rng;
use rand_distr::{Binomial, ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::boundaries::BoundarySet;
use crate::design::Design;
use crate::domain::{derive_cell_means, CellMeans, DesignParams, EffectSpec, Outcome};
use crate::error::{Error, Result};
use crate::samplesize::{largest_remainder, SampleSizePlan};
use crate::statistics::{statistic, CellData, FourCells};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    /// The tested effect is zero; the other two keep their scenario values.
    Null,
    Alternative,
}

/// Everything needed to simulate one design under one hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: DesignParams,
    /// Effects as specified for the design.
    pub effects: EffectSpec,
    pub plan: SampleSizePlan,
    pub bounds: BoundarySet,
    pub hypothesis: Hypothesis,
    /// Cell means data are generated from.
    pub cells: CellMeans,
}

impl Scenario {
    pub fn new(design: &Design, hypothesis: Hypothesis) -> Result<Self> {
        Self::from_parts(
            design.params.clone(),
            design.effects,
            design.plan.clone(),
            design.bounds.clone(),
            hypothesis,
        )
    }

    pub fn from_parts(
        params: DesignParams,
        effects: EffectSpec,
        plan: SampleSizePlan,
        bounds: BoundarySet,
        hypothesis: Hypothesis,
    ) -> Result<Self> {
        params.validate()?;
        if plan.looks() != bounds.looks() || bounds.info_fractions.as_slice() != params.info_fractions.as_slice() {
            return Err(Error::invalid("info_fractions", "plan, boundaries and design disagree on the schedule"));
        }
        let cells = derive_cell_means(&Self::generating(&effects, &params, hypothesis), params.phi)?;
        Ok(Self { params, effects, plan, bounds, hypothesis, cells })
    }

    fn generating(effects: &EffectSpec, params: &DesignParams, hypothesis: Hypothesis) -> EffectSpec {
        match hypothesis {
            Hypothesis::Null => effects.with_target(params.effect, 0.0),
            Hypothesis::Alternative => *effects,
        }
    }

    /// Effects data are generated from.
    pub fn generating_effects(&self) -> EffectSpec {
        Self::generating(&self.effects, &self.params, self.hypothesis)
    }

    pub fn looks(&self) -> usize {
        self.plan.looks()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// 1-based analysis at which the trial ended.
    pub stopped_at: usize,
    pub n_at_stop: u64,
    pub rejected: bool,
    /// Statistic at each analysis reached; `None` where the look was skipped.
    pub z_path: Vec<Option<f64>>,
    pub skipped_looks: usize,
}

/// Sufficient statistics of `n` responses with mean `mean`.
///
/// Continuous cells draw the sum and the within-cell sum of squares from
/// their exact joint distribution (independent normal and scaled chi-square);
/// binary cells draw the number of responders.
fn draw_cell<R: Rng + ?Sized>(rng: &mut R, outcome: Outcome, mean: f64, sigma: f64, n: u64) -> CellData {
    if n == 0 {
        return CellData::default();
    }
    match outcome {
        Outcome::Continuous => {
            let nf = n as f64;
            let z: f64 = StandardNormal.sample(rng);
            let sum = nf * mean + sigma * nf.sqrt() * z;
            let within = if n > 1 {
                sigma * sigma * ChiSquared::new(nf - 1.0).expect("positive degrees of freedom").sample(rng)
            } else {
                0.0
            };
            CellData { count: n, sum, sum_sq: within + sum * sum / nf }
        }
        Outcome::Binary => {
            let k = Binomial::new(n, mean).expect("validated probability").sample(rng) as f64;
            CellData { count: n, sum: k, sum_sq: k }
        }
    }
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    Binomial::new(n, p).expect("validated probability").sample(rng)
}

/// New data for analysis `l` (0-based).
pub fn generate_period<R: Rng + ?Sized>(rng: &mut R, scenario: &Scenario, l: usize) -> FourCells {
    let p = &scenario.params;
    let c = &scenario.cells;
    let outcome = scenario.effects.outcome;
    let sigma = scenario.effects.sigma.unwrap_or(0.0);

    let arms = largest_remainder(&[p.theta, 1.0 - p.theta], scenario.plan.per_analysis_new[l]);
    let (choice, random) = (arms[0], arms[1]);
    let chose1 = binomial(rng, choice, p.phi);
    let assigned = largest_remainder(&[p.zeta, 1.0 - p.zeta], random);
    let prefer1_in_r1 = binomial(rng, assigned[0], p.phi);
    let prefer1_in_r2 = binomial(rng, assigned[1], p.phi);

    let mut random1 = draw_cell(rng, outcome, c.m11, sigma, prefer1_in_r1);
    random1.merge(&draw_cell(rng, outcome, c.m12, sigma, assigned[0] - prefer1_in_r1));
    let mut random2 = draw_cell(rng, outcome, c.m21, sigma, prefer1_in_r2);
    random2.merge(&draw_cell(rng, outcome, c.m22, sigma, assigned[1] - prefer1_in_r2));
    FourCells {
        choice1: draw_cell(rng, outcome, c.m11, sigma, chose1),
        choice2: draw_cell(rng, outcome, c.m22, sigma, choice - chose1),
        random1,
        random2,
    }
}

/// Looks with fewer than this many observations in a needed cell are skipped.
pub const MIN_CELL_COUNT: u64 = 2;

/// Runs one trial to its stopping analysis.
pub fn simulate_trial<R: Rng + ?Sized>(rng: &mut R, scenario: &Scenario) -> TrialResult {
    let effect = scenario.params.effect;
    let outcome = scenario.effects.outcome;
    let looks = scenario.looks();
    let mut data = FourCells::default();
    let mut z_path = Vec::with_capacity(looks);
    let mut skipped_looks = 0;
    for l in 0..looks {
        data.merge(&generate_period(rng, scenario, l));
        let z = if data.min_count(effect) >= MIN_CELL_COUNT {
            statistic(effect, &data, outcome).ok()
        } else {
            None
        };
        z_path.push(z);
        match z {
            None => skipped_looks += 1,
            Some(t) if t.abs() > scenario.bounds.z_bounds[l] => {
                return TrialResult {
                    stopped_at: l + 1,
                    n_at_stop: scenario.plan.per_analysis_n[l],
                    rejected: true,
                    z_path,
                    skipped_looks,
                };
            }
            Some(_) => {}
        }
    }
    TrialResult {
        stopped_at: looks,
        n_at_stop: scenario.plan.max_n,
        rejected: false,
        z_path,
        skipped_looks,
    }
}
