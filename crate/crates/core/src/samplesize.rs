//! Fixed-design sample sizes and group sequential accrual plans.

use serde::{Deserialize, Serialize};

use crate::boundaries::fixed_design_drift_sq;
use crate::domain::{derive_cell_means, open_unit, Effect, EffectSpec, InfoFractions, Outcome};
use crate::error::{Error, Result};

/// Guards `ceil` against values that are integers up to rounding error.
const CEIL_SLACK: f64 = 1e-9;

/// Maximum size and the cumulative total enrolled at each analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSizePlan {
    pub fixed_n: u64,
    pub max_n: u64,
    pub per_analysis_n: Vec<u64>,
    pub per_analysis_new: Vec<u64>,
}

impl SampleSizePlan {
    pub fn looks(&self) -> usize {
        self.per_analysis_n.len()
    }
}

fn ceil_n(raw: f64) -> u64 {
    (raw - CEIL_SLACK).ceil().max(1.0) as u64
}

fn check_common(effect: Effect, spec: &EffectSpec, theta: f64, phi: f64) -> Result<f64> {
    open_unit("theta", theta)?;
    open_unit("phi", phi)?;
    spec.validate()?;
    let target = spec.target(effect);
    if target == 0.0 {
        return Err(Error::Domain(format!("{effect} effect must be nonzero to size a trial")));
    }
    Ok(target)
}

/// Unrounded fixed-design total for a continuous outcome.
pub fn fixed_n_raw_continuous(
    effect: Effect,
    spec: &EffectSpec,
    theta: f64,
    phi: f64,
    alpha: f64,
    power: f64,
) -> Result<f64> {
    if spec.outcome != Outcome::Continuous {
        return Err(Error::invalid("outcome", "expected a continuous effect specification"));
    }
    let target = check_common(effect, spec, theta, phi)?;
    let zz = fixed_design_drift_sq(alpha, power)?;
    let s2 = spec.sigma.expect("validated continuous spec has sigma").powi(2);
    let s = &spec.sizes;
    let (own, other) = match effect {
        Effect::Treatment => return Ok(4.0 * s2 * zz / ((1.0 - theta) * target * target)),
        Effect::Selection => (s.delta_nu, s.delta_pi),
        Effect::Preference => (s.delta_pi, s.delta_nu),
    };
    let q = phi * (1.0 - phi);
    let bracket = s2
        + q * ((2.0 * phi - 1.0) * own + other).powi(2)
        + 2.0 * theta / (1.0 - theta) * (phi * phi + (1.0 - phi).powi(2)) * s2;
    Ok(zz * bracket / (4.0 * theta * q * q * own * own))
}

/// Unrounded fixed-design total for a binary outcome on the risk-difference
/// scale.
pub fn fixed_n_raw_binary(
    effect: Effect,
    spec: &EffectSpec,
    theta: f64,
    phi: f64,
    alpha: f64,
    power: f64,
) -> Result<f64> {
    if spec.outcome != Outcome::Binary {
        return Err(Error::invalid("outcome", "expected a binary effect specification"));
    }
    let target = check_common(effect, spec, theta, phi)?;
    let zz = fixed_design_drift_sq(alpha, power)?;
    let c = derive_cell_means(spec, phi)?;
    let v = |p: f64| p * (1.0 - p);
    if effect == Effect::Treatment {
        return Ok(2.0 * (v(c.m1) + v(c.m2)) * zz / ((1.0 - theta) * target * target));
    }
    let d1 = c.m11 - c.m1;
    let d2 = c.m22 - c.m2;
    let sign = if effect == Effect::Selection { 1.0 } else { -1.0 };
    let q = phi * (1.0 - phi);
    let bracket = phi * v(c.m11)
        + (1.0 - phi) * v(c.m22)
        + (phi * phi * d1 + sign * (1.0 - phi).powi(2) * d2).powi(2) / q
        + 2.0 * theta / (1.0 - theta) * (phi * phi * v(c.m1) + (1.0 - phi).powi(2) * v(c.m2));
    Ok(zz * bracket / (4.0 * theta * q * q * target * target))
}

pub fn fixed_n_raw(effect: Effect, spec: &EffectSpec, theta: f64, phi: f64, alpha: f64, power: f64) -> Result<f64> {
    match spec.outcome {
        Outcome::Continuous => fixed_n_raw_continuous(effect, spec, theta, phi, alpha, power),
        Outcome::Binary => fixed_n_raw_binary(effect, spec, theta, phi, alpha, power),
    }
}

pub fn fixed_n_continuous(effect: Effect, spec: &EffectSpec, theta: f64, phi: f64, alpha: f64, power: f64) -> Result<u64> {
    fixed_n_raw_continuous(effect, spec, theta, phi, alpha, power).map(ceil_n)
}

pub fn fixed_n_binary(effect: Effect, spec: &EffectSpec, theta: f64, phi: f64, alpha: f64, power: f64) -> Result<u64> {
    fixed_n_raw_binary(effect, spec, theta, phi, alpha, power).map(ceil_n)
}

/// Fixed-design total rounded up to a whole participant.
pub fn fixed_n(effect: Effect, spec: &EffectSpec, theta: f64, phi: f64, alpha: f64, power: f64) -> Result<u64> {
    fixed_n_raw(effect, spec, theta, phi, alpha, power).map(ceil_n)
}

/// Splits `total` into integer parts proportional to `weights`, giving the
/// leftover units to the largest fractional remainders (earlier index wins
/// ties).
pub fn largest_remainder(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut parts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = exact[i] - exact[i].floor();
        let rj = exact[j] - exact[j].floor();
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().take(total.saturating_sub(assigned) as usize) {
        parts[i] += 1;
    }
    parts
}

/// Maximum size `ceil(inflation · fixed_n)` with cumulative totals
/// `round(Π_l · max_n)` at each analysis.
pub fn build_plan(fixed_n: u64, inflation: f64, info: &InfoFractions) -> Result<SampleSizePlan> {
    if fixed_n == 0 {
        return Err(Error::invalid("fixed_n", "must be at least 1"));
    }
    if !(inflation >= 1.0 && inflation.is_finite()) {
        return Err(Error::invalid("inflation", format!("must be at least 1, got {inflation}")));
    }
    let max_n = ceil_n(inflation * fixed_n as f64);
    if (max_n as usize) < info.looks() {
        return Err(Error::invalid(
            "looks",
            format!("{} analyses cannot each enrol someone new out of {max_n}", info.looks()),
        ));
    }
    let looks = info.looks();
    let mut per_analysis_n: Vec<u64> =
        info.as_slice().iter().map(|pi| (pi * max_n as f64).round() as u64).collect();
    per_analysis_n[looks - 1] = max_n;
    // Every analysis needs someone new.
    for l in 0..looks {
        per_analysis_n[l] = per_analysis_n[l].max(l as u64 + 1);
    }
    for l in (0..looks - 1).rev() {
        per_analysis_n[l] = per_analysis_n[l].min(per_analysis_n[l + 1] - 1);
    }
    let per_analysis_new = per_analysis_n
        .iter()
        .scan(0, |prev, &n| {
            let d = n - *prev;
            *prev = n;
            Some(d)
        })
        .collect();
    Ok(SampleSizePlan { fixed_n, max_n, per_analysis_n, per_analysis_new })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: f64 = 0.05;
    const P: f64 = 0.9;

    fn cont(tau: f64, nu: f64, pi: f64, sigma: f64) -> EffectSpec {
        EffectSpec::continuous(0.0, tau, nu, pi, sigma).unwrap()
    }

    #[test]
    fn treatment_size_by_hand() {
        // 4 σ² (z_.975 + z_.9)² / ((1 - θ) Δ²) with (1.959964 + 1.281552)² = 10.507423
        let raw = fixed_n_raw_continuous(Effect::Treatment, &cont(0.2, 0.0, 0.0, 1.0), 0.5, 0.5, A, P).unwrap();
        assert!((raw - 4.0 * 10.507_423 / (0.5 * 0.04)).abs() < 1e-3);
        assert_eq!(fixed_n(Effect::Treatment, &cont(0.2, 0.0, 0.0, 1.0), 0.5, 0.5, A, P).unwrap(), 2102);
    }

    #[test]
    fn hrqol_sizes() {
        let spec = EffectSpec::continuous(0.0, -2.0, -2.1, 3.9, 4.0).unwrap();
        let got: Vec<u64> = Effect::ALL.iter().map(|&e| fixed_n(e, &spec, 0.5, 0.56, A, P).unwrap()).collect();
        assert_eq!(got, vec![337, 697, 188]);
    }

    #[test]
    fn zero_target_is_domain_error() {
        let spec = cont(0.0, 0.2, 0.3, 1.0);
        assert!(matches!(fixed_n(Effect::Treatment, &spec, 0.5, 0.5, A, P), Err(Error::Domain(_))));
    }

    #[test]
    fn unrealizable_binary_cells_propagate() {
        let spec = EffectSpec::binary(0.9, 0.15, 0.2, 0.3).unwrap();
        assert!(matches!(
            fixed_n(Effect::Selection, &spec, 0.5, 0.5, A, P),
            Err(Error::InvalidBinaryCells { .. })
        ));
    }

    #[test]
    fn binary_selection_and_preference_at_half() {
        let spec = EffectSpec::binary(0.5, 0.1, 0.1, 0.1).unwrap();
        assert_eq!(fixed_n(Effect::Selection, &spec, 0.5, 0.5, A, P).unwrap(), 4098);
        assert_eq!(fixed_n(Effect::Preference, &spec, 0.5, 0.5, A, P).unwrap(), 4098);
        let tau = fixed_n(Effect::Treatment, &spec, 0.5, 0.5, A, P).unwrap();
        assert!((2080..=2082).contains(&tau));
    }

    #[test]
    fn convex_in_theta_with_interior_minimum() {
        let spec = cont(0.2, 0.2, 0.3, 1.0);
        for effect in [Effect::Selection, Effect::Preference] {
            let n: Vec<f64> = (1..=9)
                .map(|k| fixed_n_raw(effect, &spec, k as f64 / 10.0, 0.5, A, P).unwrap())
                .collect();
            for w in n.windows(3) {
                assert!(w[0] + w[2] - 2.0 * w[1] > 0.0, "{effect}: {n:?}");
            }
            let argmin = (0..9).min_by(|&i, &j| n[i].total_cmp(&n[j])).unwrap();
            assert!((3..=5).contains(&argmin), "{effect} minimum at θ = 0.{}", argmin + 1);
        }
    }

    #[test]
    fn largest_remainder_examples() {
        assert_eq!(largest_remainder(&[1.0, 1.0, 1.0], 388), vec![130, 129, 129]);
        assert_eq!(largest_remainder(&[0.5, 0.5], 7), vec![4, 3]);
        assert_eq!(largest_remainder(&[0.2, 0.3, 0.5], 10), vec![2, 3, 5]);
        assert_eq!(largest_remainder(&[], 10), Vec::<u64>::new());
    }

    #[test]
    fn plan_examples() {
        let thirds = InfoFractions::equally_spaced(3).unwrap();
        let p = build_plan(337, 1.1513, &thirds).unwrap();
        assert_eq!(p.max_n, 388);
        assert_eq!(p.per_analysis_n, vec![129, 259, 388]);
        // ceil(709.41)
        assert_eq!(build_plan(697, 1.0178, &thirds).unwrap().max_n, 710);
        assert_eq!(build_plan(523, 1.0, &thirds).unwrap().max_n, 523);
        assert!(build_plan(2, 1.0, &thirds).is_err());
        assert!(build_plan(10, 0.9, &thirds).is_err());
    }

    #[test]
    fn uneven_schedule_keeps_every_increment_positive() {
        let info = InfoFractions::new(vec![0.01, 0.02, 1.0]).unwrap();
        let p = build_plan(3, 1.0, &info).unwrap();
        assert_eq!(p.per_analysis_new, vec![1, 1, 1]);
    }

    proptest! {
        #[test]
        fn nu_pi_symmetric_under_swap(
            nu in prop_oneof![-1.0..-0.05f64, 0.05..1.0f64],
            pi in prop_oneof![-1.0..-0.05f64, 0.05..1.0f64],
            sigma in 0.5..3.0f64,
            theta in 0.1..0.9f64,
            phi in 0.1..0.9f64,
        ) {
            let a = fixed_n_raw(Effect::Selection, &cont(0.3, nu, pi, sigma), theta, phi, A, P).unwrap();
            let b = fixed_n_raw(Effect::Preference, &cont(0.3, pi, nu, sigma), theta, phi, A, P).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }

        #[test]
        fn larger_effect_needs_fewer(
            base in 0.05..0.5f64,
            factor in 1.05..3.0f64,
            other in -0.3..0.3f64,
            theta in 0.1..0.9f64,
            phi in 0.1..0.9f64,
        ) {
            for effect in Effect::ALL {
                let small = cont(0.2, 0.2, other, 1.0).with_target(effect, base);
                let large = small.with_target(effect, base * factor);
                let ns = fixed_n_raw(effect, &small, theta, phi, A, P).unwrap();
                let nl = fixed_n_raw(effect, &large, theta, phi, A, P).unwrap();
                prop_assert!(nl < ns, "{effect}: {nl} >= {ns}");
            }
        }

        #[test]
        fn plan_invariants(fixed in 3u64..5000, inflation in 1.0..1.5f64, looks in 1usize..6) {
            let info = InfoFractions::equally_spaced(looks).unwrap();
            let p = build_plan(fixed, inflation, &info).unwrap();
            prop_assert_eq!(*p.per_analysis_n.last().unwrap(), p.max_n);
            prop_assert!(p.per_analysis_new.iter().all(|&n| n >= 1));
            prop_assert!(p.per_analysis_n.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(p.max_n >= fixed);
        }
    }
}
