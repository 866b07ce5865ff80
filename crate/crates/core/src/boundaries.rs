//! Alpha-spending boundaries and sequential crossing probabilities.
//!
//! Everything is computed on the score scale `W_l`, a Brownian motion in
//! information time: under drift `δ`, `W_l ~ N(δ Π_l, Π_l)` with independent
//! increments of variance `ΔΠ_l`. The sub-density of `W_l` over the
//! continuation region is carried from one analysis to the next by numerical
//! convolution with the normal increment density on a composite
//! Gauss–Legendre grid. Exit probabilities use the closed-form normal tail of
//! the increment, so only one quadrature is needed per analysis.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::domain::{open_unit, InfoFractions, SpendingFamily};
use crate::error::{Error, Result};
use crate::numerics::{find_root, normal_cdf, normal_quantile, normal_sf, QuadratureGrid};

/// Quadrature nodes per analysis for the continuation-region density.
pub const DEFAULT_GRID_POINTS: usize = 2000;

/// Density support is truncated this many standard deviations from the mean.
const TAIL_SD: f64 = 8.0;

/// Upper end of the root bracket on the z scale.
const Z_BRACKET_HI: f64 = 12.0;

/// Kernel terms with a standardized distance beyond this are below 1e-17.
const KERNEL_CUTOFF_SQ: f64 = 81.0;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Cumulative type I error allowed by information fraction `pi`.
pub fn spend_alpha(family: SpendingFamily, alpha: f64, pi: f64) -> Result<f64> {
    open_unit("alpha", alpha)?;
    if !(pi > 0.0 && pi <= 1.0) {
        return Err(Error::Domain(format!(
            "information fraction must lie in (0, 1], got {pi}"
        )));
    }
    Ok(match family {
        SpendingFamily::Pocock => alpha * (1.0 + (E - 1.0) * pi).ln(),
        SpendingFamily::Obf => {
            let z = -normal_quantile(0.5 * alpha)?;
            2.0 * normal_sf(z / pi.sqrt())
        }
    })
}

/// Stopping thresholds for every analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    /// `None` for user-supplied thresholds.
    pub family: Option<SpendingFamily>,
    pub alpha: f64,
    pub info_fractions: Vec<f64>,
    /// Cumulative alpha spent through each analysis.
    pub cum_alpha: Vec<f64>,
    /// Thresholds on the standardized (test statistic of analysis) scale.
    pub z_bounds: Vec<f64>,
    /// Thresholds on the score scale, `z_bounds[l] * sqrt(info_fractions[l])`.
    pub score_bounds: Vec<f64>,
}

impl BoundarySet {
    pub fn looks(&self) -> usize {
        self.z_bounds.len()
    }

    /// Alpha newly spent at each analysis.
    pub fn spent_increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cum_alpha
            .iter()
            .map(|&c| {
                let d = c - prev;
                prev = c;
                d
            })
            .collect()
    }

    /// Thresholds given directly on the z scale. `f64::INFINITY` disables
    /// stopping at an analysis. Cumulative alpha is the null crossing
    /// probability these thresholds imply.
    pub fn from_z_bounds(info: &InfoFractions, z_bounds: Vec<f64>) -> Result<Self> {
        if z_bounds.len() != info.looks() {
            return Err(Error::invalid(
                "z_bounds",
                format!("expected {} thresholds, got {}", info.looks(), z_bounds.len()),
            ));
        }
        if z_bounds.iter().any(|z| !(*z > 0.0)) {
            return Err(Error::invalid("z_bounds", "thresholds must be positive"));
        }
        let t = info.as_slice();
        let score_bounds: Vec<f64> = z_bounds.iter().zip(t).map(|(z, ti)| z * ti.sqrt()).collect();
        let mut bounds = Self {
            family: None,
            alpha: f64::NAN,
            info_fractions: t.to_vec(),
            cum_alpha: vec![0.0; t.len()],
            z_bounds,
            score_bounds,
        };
        let null = crossing_probabilities(&bounds, 0.0);
        let mut acc = 0.0;
        for (c, p) in bounds.cum_alpha.iter_mut().zip(&null.per_analysis) {
            acc += p;
            *c = acc;
        }
        bounds.alpha = acc;
        Ok(bounds)
    }
}

/// First-crossing probabilities under a given drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingProbabilities {
    pub per_analysis: Vec<f64>,
    pub total: f64,
}

impl CrossingProbabilities {
    /// Probability of stopping at each analysis when the last analysis always
    /// ends the trial.
    pub fn stopping_distribution(&self) -> Vec<f64> {
        let mut out = self.per_analysis.clone();
        if let Some(last) = out.last_mut() {
            let earlier: f64 = self.per_analysis[..self.per_analysis.len() - 1].iter().sum();
            *last = (1.0 - earlier).max(0.0);
        }
        out
    }
}

/// Quadrature representation of a sub-density: `mass[j] = w_j f(u_j)`.
#[derive(Debug, Clone)]
struct SubDensity {
    nodes: Vec<f64>,
    mass: Vec<f64>,
}

impl SubDensity {
    fn empty() -> Self {
        Self { nodes: Vec::new(), mass: Vec::new() }
    }

    /// Normal density `N(mean, sd²)` restricted to `[-a, a]`.
    fn initial(a: f64, mean: f64, sd: f64, points: usize) -> Self {
        let Some(grid) = region(a, mean, sd, points) else {
            return Self::empty();
        };
        let mass = grid
            .nodes
            .iter()
            .zip(&grid.weights)
            .map(|(&x, &w)| {
                let z = (x - mean) / sd;
                w * INV_SQRT_2PI * (-0.5 * z * z).exp() / sd
            })
            .collect();
        Self { nodes: grid.nodes, mass }
    }

    /// Probability of leaving `[-a, a]` after an increment `N(shift, sd²)`.
    fn exit_probability(&self, a: f64, shift: f64, sd: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.mass)
            .map(|(&u, &m)| {
                let centre = u + shift;
                m * (normal_cdf((-a - centre) / sd) + normal_sf((a - centre) / sd))
            })
            .sum()
    }

    /// Sub-density of the next score restricted to `[-a, a]`, where the
    /// marginal next score has mean `mean` and standard deviation `total_sd`.
    fn propagate(&self, a: f64, shift: f64, sd: f64, mean: f64, total_sd: f64, points: usize) -> Self {
        let Some(grid) = region(a, mean, total_sd, points) else {
            return Self::empty();
        };
        let inv_sd = 1.0 / sd;
        let centres: Vec<f64> = self.nodes.iter().map(|u| u + shift).collect();
        let mass = grid
            .nodes
            .iter()
            .zip(&grid.weights)
            .map(|(&s, &w)| {
                let mut dens = 0.0;
                for (&c, &m) in centres.iter().zip(&self.mass) {
                    let z = (s - c) * inv_sd;
                    let z2 = z * z;
                    if z2 < KERNEL_CUTOFF_SQ {
                        dens += m * (-0.5 * z2).exp();
                    }
                }
                w * dens * INV_SQRT_2PI * inv_sd
            })
            .collect();
        Self { nodes: grid.nodes, mass }
    }
}

/// `[-a, a]` intersected with `mean ± 8 sd`, or `None` when empty.
fn region(a: f64, mean: f64, sd: f64, points: usize) -> Option<QuadratureGrid> {
    let lo = (-a).max(mean - TAIL_SD * sd);
    let hi = a.min(mean + TAIL_SD * sd);
    (hi > lo).then(|| QuadratureGrid::with_points(lo, hi, points))
}

/// Boundaries for `family` at the default grid resolution.
pub fn compute_boundaries(family: SpendingFamily, alpha: f64, info: &InfoFractions) -> Result<BoundarySet> {
    compute_boundaries_with(family, alpha, info, DEFAULT_GRID_POINTS)
}

/// Solves, analysis by analysis, for the score threshold `a_l` at which the
/// probability of first crossing equals the alpha newly spent.
pub fn compute_boundaries_with(
    family: SpendingFamily,
    alpha: f64,
    info: &InfoFractions,
    points: usize,
) -> Result<BoundarySet> {
    let t = info.as_slice();
    let cum_alpha = t
        .iter()
        .map(|&pi| spend_alpha(family, alpha, pi))
        .collect::<Result<Vec<_>>>()?;

    let mut score_bounds = Vec::with_capacity(t.len());
    let mut density = SubDensity::empty();
    let mut prev_t = 0.0;
    let mut prev_cum = 0.0;
    for (l, (&tl, &cum)) in t.iter().zip(&cum_alpha).enumerate() {
        let increment = cum - prev_cum;
        if !(increment > 0.0) {
            return Err(Error::Spending { analysis: l + 1, increment });
        }
        let sd = (tl - prev_t).sqrt();
        let a = if l == 0 {
            -normal_quantile(0.5 * increment)? * sd
        } else {
            find_root(
                |a| density.exit_probability(a, 0.0, sd) - increment,
                0.0,
                Z_BRACKET_HI * tl.sqrt(),
                1e-12,
            )?
        };
        if l + 1 < t.len() {
            density = if l == 0 {
                SubDensity::initial(a, 0.0, sd, points)
            } else {
                density.propagate(a, 0.0, sd, 0.0, tl.sqrt(), points)
            };
        }
        score_bounds.push(a);
        prev_t = tl;
        prev_cum = cum;
    }

    let z_bounds = score_bounds.iter().zip(t).map(|(a, ti)| a / ti.sqrt()).collect();
    Ok(BoundarySet {
        family: Some(family),
        alpha,
        info_fractions: t.to_vec(),
        cum_alpha,
        z_bounds,
        score_bounds,
    })
}

/// Crossing probabilities at the default grid resolution.
pub fn crossing_probabilities(bounds: &BoundarySet, drift: f64) -> CrossingProbabilities {
    crossing_probabilities_with(bounds, drift, DEFAULT_GRID_POINTS)
}

/// First-crossing probability at each analysis when the score has drift
/// `drift` per unit information fraction.
pub fn crossing_probabilities_with(bounds: &BoundarySet, drift: f64, points: usize) -> CrossingProbabilities {
    let t = &bounds.info_fractions;
    let mut per_analysis = Vec::with_capacity(t.len());
    let mut density = SubDensity::empty();
    let mut prev_t = 0.0;
    for (l, (&tl, &a)) in t.iter().zip(&bounds.score_bounds).enumerate() {
        let dt = tl - prev_t;
        let sd = dt.sqrt();
        let shift = drift * dt;
        let p = if l == 0 {
            normal_cdf((-a - shift) / sd) + normal_sf((a - shift) / sd)
        } else {
            density.exit_probability(a, shift, sd)
        };
        per_analysis.push(p);
        if l + 1 < t.len() {
            density = if l == 0 {
                SubDensity::initial(a, shift, sd, points)
            } else {
                density.propagate(a, shift, sd, drift * tl, tl.sqrt(), points)
            };
        }
        prev_t = tl;
    }
    let total = per_analysis.iter().sum();
    CrossingProbabilities { per_analysis, total }
}

/// `(z_{1-α/2} + z_{1-β})²`, the squared drift a fixed design needs.
pub fn fixed_design_drift_sq(alpha: f64, power: f64) -> Result<f64> {
    open_unit("alpha", alpha)?;
    open_unit("power", power)?;
    let z = -normal_quantile(0.5 * alpha)? + normal_quantile(power)?;
    Ok(z * z)
}

/// Ratio of the maximum group sequential information to the fixed-design
/// information at equal power.
pub fn inflation_factor(family: SpendingFamily, alpha: f64, power: f64, info: &InfoFractions) -> Result<f64> {
    let bounds = compute_boundaries(family, alpha, info)?;
    inflation_factor_for(&bounds, power, 1.0)
}

/// Inflation factor for existing boundaries. The maximum information
/// `I_max` is solved so that an effect `effect` (on the score-per-information
/// scale) is detected with probability `power`; the result
/// `I_max · effect² / (z_{1-α/2} + z_{1-β})²` does not depend on `effect`.
pub fn inflation_factor_for(bounds: &BoundarySet, power: f64, effect: f64) -> Result<f64> {
    if bounds.looks() == 1 {
        return Ok(1.0);
    }
    if !(effect > 0.0 && effect.is_finite()) {
        return Err(Error::Domain(format!("effect must be positive, got {effect}")));
    }
    let fixed_sq = fixed_design_drift_sq(bounds.alpha, power)?;
    let fixed_info = fixed_sq / (effect * effect);
    let power_gap = |info: f64| crossing_probabilities(bounds, effect * info.sqrt()).total - power;
    let info_max = find_root(power_gap, fixed_info, 2.0 * fixed_info, 1e-11 * fixed_info)?;
    Ok((info_max * effect * effect / fixed_sq).max(1.0))
}
