pub mod boundaries;
pub mod design;
pub mod domain;
pub mod error;
pub mod numerics;
pub mod samplesize;
pub mod simulation;
pub mod statistics;

pub use boundaries::{
    compute_boundaries, crossing_probabilities, inflation_factor, spend_alpha, BoundarySet,
    CrossingProbabilities,
};
pub use domain::{
    derive_cell_means, recover_effects, CellMeans, DesignParams, Effect, EffectSizes, EffectSpec,
    InfoFractions, Outcome, SpendingFamily,
};
pub use error::{Error, Result};
pub use samplesize::{build_plan, fixed_n, largest_remainder, SampleSizePlan};
pub use statistics::{AccruedData, CellData, EffectStatistics, FourCells, VarComponents};
pub use design::Design;
pub use simulation::{run_monte_carlo, simulate_trial, Hypothesis, Scenario, SimSummary, TrialResult};
