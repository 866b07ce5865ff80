//! Test statistics of analysis and their variance estimators.
//!
//! `x` denotes responses in the choice arm and `y` responses in the random
//! arm; index `i` is the treatment received (and, in the choice arm, the one
//! preferred).

use serde::{Deserialize, Serialize};

use crate::domain::{Effect, Outcome};
use crate::error::{Error, Result};

/// Streaming sufficient statistics for one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CellData {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl CellData {
    pub fn from_values(values: &[f64]) -> Self {
        let mut c = Self::default();
        for &v in values {
            c.push(v);
        }
        c
    }

    pub fn push(&mut self, y: f64) {
        self.count += 1;
        self.sum += y;
        self.sum_sq += y * y;
    }

    pub fn merge(&mut self, other: &CellData) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Empirical (n - 1) variance for continuous data, `p(1 - p)` for binary.
    pub fn variance(&self, outcome: Outcome) -> f64 {
        let n = self.count as f64;
        match outcome {
            Outcome::Continuous => ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0),
            Outcome::Binary => {
                let p = self.mean();
                p * (1.0 - p)
            }
        }
    }

    fn scaled(&self, c: f64) -> Self {
        Self { count: self.count, sum: c * self.sum, sum_sq: c * c * self.sum_sq }
    }
}

/// The four observation cells of a two-stage preference trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FourCells {
    /// Choice arm, chose treatment 1 (`x_1`).
    pub choice1: CellData,
    /// Choice arm, chose treatment 2 (`x_2`).
    pub choice2: CellData,
    /// Random arm, assigned treatment 1 (`y_1`).
    pub random1: CellData,
    /// Random arm, assigned treatment 2 (`y_2`).
    pub random2: CellData,
}

impl FourCells {
    pub fn merge(&mut self, other: &FourCells) {
        self.choice1.merge(&other.choice1);
        self.choice2.merge(&other.choice2);
        self.random1.merge(&other.random1);
        self.random2.merge(&other.random2);
    }

    pub fn total(&self) -> u64 {
        self.choice1.count + self.choice2.count + self.random1.count + self.random2.count
    }

    /// Relabels treatment 1 as 2 and vice versa.
    pub fn swap_labels(&self) -> Self {
        Self { choice1: self.choice2, choice2: self.choice1, random1: self.random2, random2: self.random1 }
    }

    /// Every response multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            choice1: self.choice1.scaled(c),
            choice2: self.choice2.scaled(c),
            random1: self.random1.scaled(c),
            random2: self.random2.scaled(c),
        }
    }

    /// Smallest count among the cells a statistic for `effect` reads.
    pub fn min_count(&self, effect: Effect) -> u64 {
        let random = self.random1.count.min(self.random2.count);
        match effect {
            Effect::Treatment => random,
            Effect::Selection | Effect::Preference => random.min(self.choice1.count).min(self.choice2.count),
        }
    }
}

/// Per-period data with a running cumulative view.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccruedData {
    periods: Vec<FourCells>,
    cumulative: FourCells,
}

impl AccruedData {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_period(&mut self, period: FourCells) {
        self.cumulative.merge(&period);
        self.periods.push(period);
    }

    pub fn periods(&self) -> &[FourCells] {
        &self.periods
    }

    /// Data from every period so far.
    pub fn cumulative(&self) -> &FourCells {
        &self.cumulative
    }
}

/// Estimated `Var(z_1)`, `Var(z_2)` and `Cov(z_1, z_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarComponents {
    pub var_z1: f64,
    pub var_z2: f64,
    pub cov_z1z2: f64,
}

impl VarComponents {
    pub fn var_diff(&self) -> f64 {
        self.var_z1 + self.var_z2 - 2.0 * self.cov_z1z2
    }

    pub fn var_sum(&self) -> f64 {
        self.var_z1 + self.var_z2 + 2.0 * self.cov_z1z2
    }
}

/// Standardized statistics for all three effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectStatistics {
    pub t_tau: f64,
    pub t_nu: f64,
    pub t_pi: f64,
}

impl EffectStatistics {
    pub fn get(&self, effect: Effect) -> f64 {
        match effect {
            Effect::Treatment => self.t_tau,
            Effect::Selection => self.t_nu,
            Effect::Preference => self.t_pi,
        }
    }
}

fn min_cell_count(outcome: Outcome) -> u64 {
    match outcome {
        Outcome::Continuous => 2,
        Outcome::Binary => 1,
    }
}

fn require(cell: &CellData, name: &str, outcome: Outcome) -> Result<()> {
    let need = min_cell_count(outcome);
    if cell.count < need {
        return Err(Error::InsufficientData(format!("{name} has {} observations, need {need}", cell.count)));
    }
    Ok(())
}

fn standardize(numerator: f64, variance: f64) -> Result<f64> {
    if variance > 0.0 && variance.is_finite() {
        Ok(numerator / variance.sqrt())
    } else {
        Err(Error::DegenerateVariance)
    }
}

/// `z_i = Σ x_i - m_i ȳ_i`.
pub fn z_scores(data: &FourCells) -> (f64, f64) {
    let z1 = data.choice1.sum - data.choice1.count as f64 * data.random1.mean();
    let z2 = data.choice2.sum - data.choice2.count as f64 * data.random2.mean();
    (z1, z2)
}

pub fn var_components(data: &FourCells, outcome: Outcome) -> Result<VarComponents> {
    require(&data.choice1, "choice arm, treatment 1", outcome)?;
    require(&data.choice2, "choice arm, treatment 2", outcome)?;
    require(&data.random1, "random arm, treatment 1", outcome)?;
    require(&data.random2, "random arm, treatment 2", outcome)?;

    let m1 = data.choice1.count as f64;
    let m2 = data.choice2.count as f64;
    let m = m1 + m2;
    let cross = m1 * m2 / m;
    let gap1 = data.choice1.mean() - data.random1.mean();
    let gap2 = data.choice2.mean() - data.random2.mean();

    let var_z = |x: &CellData, y: &CellData, mi: f64, gap: f64| {
        mi * x.variance(outcome)
            + (1.0 + (m - 1.0) / m * mi) * mi * y.variance(outcome) / y.count as f64
            + cross * gap * gap
    };
    Ok(VarComponents {
        var_z1: var_z(&data.choice1, &data.random1, m1, gap1),
        var_z2: var_z(&data.choice2, &data.random2, m2, gap2),
        cov_z1z2: -cross * gap1 * gap2,
    })
}

pub fn t_treatment(data: &FourCells, outcome: Outcome) -> Result<f64> {
    require(&data.random1, "random arm, treatment 1", outcome)?;
    require(&data.random2, "random arm, treatment 2", outcome)?;
    let (y1, y2) = (&data.random1, &data.random2);
    let variance = y1.variance(outcome) / y1.count as f64 + y2.variance(outcome) / y2.count as f64;
    standardize(y1.mean() - y2.mean(), variance)
}

pub fn t_selection(data: &FourCells, outcome: Outcome) -> Result<f64> {
    let v = var_components(data, outcome)?;
    let (z1, z2) = z_scores(data);
    standardize(z1 - z2, v.var_diff())
}

pub fn t_preference(data: &FourCells, outcome: Outcome) -> Result<f64> {
    let v = var_components(data, outcome)?;
    let (z1, z2) = z_scores(data);
    standardize(z1 + z2, v.var_sum())
}

/// Test statistic of analysis for `effect` on cumulative data.
pub fn statistic(effect: Effect, data: &FourCells, outcome: Outcome) -> Result<f64> {
    match effect {
        Effect::Treatment => t_treatment(data, outcome),
        Effect::Selection => t_selection(data, outcome),
        Effect::Preference => t_preference(data, outcome),
    }
}

/// All three statistics computed from a single period's data.
pub fn period_statistics(data: &FourCells, outcome: Outcome) -> Result<EffectStatistics> {
    Ok(EffectStatistics {
        t_tau: t_treatment(data, outcome)?,
        t_nu: t_selection(data, outcome)?,
        t_pi: t_preference(data, outcome)?,
    })
}

/// Cumulative statistic `S_l`: the sum of per-period statistics over the
/// first `l` periods.
pub fn cumulative_statistic(data: &AccruedData, effect: Effect, l: usize, outcome: Outcome) -> Result<f64> {
    if l == 0 || l > data.periods().len() {
        return Err(Error::InsufficientData(format!("{} periods accrued, asked for {l}", data.periods().len())));
    }
    data.periods()[..l].iter().map(|p| statistic(effect, p, outcome)).sum()
}
