//! Trial parameters and the mapping between effect sizes and per-cell means.
//!
//! Cells are indexed `(received, preferred)`: `m12` is the mean response of a
//! participant who receives treatment 1 but prefers treatment 2. The random
//! arm means `m1`, `m2` are preference mixtures of those cells.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Continuous,
    Binary,
}

/// The effect a design is powered for and tested on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    Treatment,
    Selection,
    Preference,
}

impl Effect {
    pub const ALL: [Effect; 3] = [Effect::Treatment, Effect::Selection, Effect::Preference];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpendingFamily {
    Pocock,
    /// O'Brien–Fleming-type spending.
    Obf,
}

macro_rules! string_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::Domain(format!(
                        concat!("unknown ", stringify!($ty), " '{}'"), other
                    ))),
                }
            }
        }
    };
}

string_enum!(Outcome { Continuous => "continuous", Binary => "binary" });
string_enum!(Effect { Treatment => "treatment", Selection => "selection", Preference => "preference" });
string_enum!(SpendingFamily { Pocock => "pocock", Obf => "obf" });

/// Strictly increasing information fractions ending at exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InfoFractions(Vec<f64>);

impl InfoFractions {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::invalid("info_fractions", "at least one analysis is required"));
        }
        let mut prev = 0.0;
        for &f in &fractions {
            if !(f > prev) {
                return Err(Error::invalid(
                    "info_fractions",
                    format!("must be strictly increasing in (0, 1], got {fractions:?}"),
                ));
            }
            prev = f;
        }
        if prev != 1.0 {
            return Err(Error::invalid(
                "info_fractions",
                format!("last fraction must be exactly 1, got {prev}"),
            ));
        }
        Ok(Self(fractions))
    }

    /// `looks` equally spaced analyses.
    pub fn equally_spaced(looks: usize) -> Result<Self> {
        if looks == 0 {
            return Err(Error::invalid("looks", "at least one analysis is required"));
        }
        let mut v: Vec<f64> = (1..=looks).map(|l| l as f64 / looks as f64).collect();
        *v.last_mut().unwrap() = 1.0;
        Self::new(v)
    }

    pub fn looks(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Newly accrued fraction `q_l` at each analysis.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.0
            .iter()
            .map(|&f| {
                let q = f - prev;
                prev = f;
                q
            })
            .collect()
    }
}

impl TryFrom<Vec<f64>> for InfoFractions {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<InfoFractions> for Vec<f64> {
    fn from(f: InfoFractions) -> Self {
        f.0
    }
}

/// Trial-level configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// Fraction randomized to the choice arm in the first stage.
    pub theta: f64,
    /// Expected preference rate for treatment 1.
    pub phi: f64,
    /// Second-stage randomization fraction to treatment 1.
    pub zeta: f64,
    /// Two-sided type I error.
    pub alpha: f64,
    pub power: f64,
    pub info_fractions: InfoFractions,
    pub spending: SpendingFamily,
    pub effect: Effect,
}

impl DesignParams {
    pub const DEFAULT_ZETA: f64 = 0.5;

    pub fn new(
        theta: f64,
        phi: f64,
        alpha: f64,
        power: f64,
        info_fractions: InfoFractions,
        spending: SpendingFamily,
        effect: Effect,
    ) -> Result<Self> {
        let p = Self {
            theta,
            phi,
            zeta: Self::DEFAULT_ZETA,
            alpha,
            power,
            info_fractions,
            spending,
            effect,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        open_unit("theta", self.theta)?;
        open_unit("phi", self.phi)?;
        open_unit("zeta", self.zeta)?;
        open_unit("alpha", self.alpha)?;
        open_unit("power", self.power)?;
        Ok(())
    }

    pub fn looks(&self) -> usize {
        self.info_fractions.looks()
    }
}

pub(crate) fn open_unit(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

/// Overall level and the three effect differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSizes {
    /// Overall mean (continuous) or overall response proportion (binary).
    pub overall: f64,
    pub delta_tau: f64,
    pub delta_nu: f64,
    pub delta_pi: f64,
}

impl EffectSizes {
    pub fn get(&self, effect: Effect) -> f64 {
        match effect {
            Effect::Treatment => self.delta_tau,
            Effect::Selection => self.delta_nu,
            Effect::Preference => self.delta_pi,
        }
    }

    pub fn with(mut self, effect: Effect, value: f64) -> Self {
        match effect {
            Effect::Treatment => self.delta_tau = value,
            Effect::Selection => self.delta_nu = value,
            Effect::Preference => self.delta_pi = value,
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSpec {
    pub outcome: Outcome,
    pub sizes: EffectSizes,
    /// Residual standard deviation; present only for continuous outcomes.
    pub sigma: Option<f64>,
}

impl EffectSpec {
    pub fn continuous(overall: f64, delta_tau: f64, delta_nu: f64, delta_pi: f64, sigma: f64) -> Result<Self> {
        let spec = Self {
            outcome: Outcome::Continuous,
            sizes: EffectSizes { overall, delta_tau, delta_nu, delta_pi },
            sigma: Some(sigma),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn binary(overall: f64, delta_tau: f64, delta_nu: f64, delta_pi: f64) -> Result<Self> {
        let spec = Self {
            outcome: Outcome::Binary,
            sizes: EffectSizes { overall, delta_tau, delta_nu, delta_pi },
            sigma: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sizes;
        for (field, v) in [
            ("overall", s.overall),
            ("delta_tau", s.delta_tau),
            ("delta_nu", s.delta_nu),
            ("delta_pi", s.delta_pi),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, format!("must be finite, got {v}")));
            }
        }
        match (self.outcome, self.sigma) {
            (Outcome::Continuous, Some(sd)) if sd > 0.0 && sd.is_finite() => Ok(()),
            (Outcome::Continuous, Some(sd)) => Err(Error::invalid("sigma", format!("must be positive, got {sd}"))),
            (Outcome::Continuous, None) => Err(Error::invalid("sigma", "required for continuous outcomes")),
            (Outcome::Binary, None) => Ok(()),
            (Outcome::Binary, Some(_)) => Err(Error::invalid("sigma", "not used for binary outcomes")),
        }
    }

    pub fn target(&self, effect: Effect) -> f64 {
        self.sizes.get(effect)
    }

    /// Copy with one effect replaced, e.g. zeroed for a null scenario.
    pub fn with_target(&self, effect: Effect, value: f64) -> Self {
        Self { sizes: self.sizes.with(effect, value), ..*self }
    }
}

/// Mean response (or response probability) of every arm/preference cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMeans {
    pub m1: f64,
    pub m2: f64,
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl CellMeans {
    pub fn all(&self) -> [(&'static str, f64); 6] {
        [
            ("m1", self.m1),
            ("m2", self.m2),
            ("m11", self.m11),
            ("m12", self.m12),
            ("m21", self.m21),
            ("m22", self.m22),
        ]
    }

    /// Mean for a participant receiving `received` who prefers `preferred`
    /// (both 1 or 2).
    pub fn cell(&self, received: u8, preferred: u8) -> f64 {
        match (received, preferred) {
            (1, 1) => self.m11,
            (1, 2) => self.m12,
            (2, 1) => self.m21,
            (2, 2) => self.m22,
            _ => panic!("cell indices must be 1 or 2"),
        }
    }
}

/// Per-cell means implied by the effect sizes, anchored at
/// `overall = (m1 + m2) / 2`.
pub fn derive_cell_means(effects: &EffectSpec, phi: f64) -> Result<CellMeans> {
    open_unit("phi", phi)?;
    effects.validate()?;
    let s = &effects.sizes;
    let m1 = s.overall + 0.5 * s.delta_tau;
    let m2 = s.overall - 0.5 * s.delta_tau;
    let m11 = m1 + (1.0 - phi) * (s.delta_nu + s.delta_pi);
    let m22 = m2 + phi * (s.delta_pi - s.delta_nu);
    let m12 = (m1 - phi * m11) / (1.0 - phi);
    let m21 = (m2 - (1.0 - phi) * m22) / phi;
    let cells = CellMeans { m1, m2, m11, m12, m21, m22 };
    if effects.outcome == Outcome::Binary {
        for (cell, value) in cells.all() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidBinaryCells { cell, value });
            }
        }
    }
    Ok(cells)
}

/// Effect sizes from the observable means `m1, m2, m11, m22`.
pub fn recover_effects(cells: &CellMeans, phi: f64) -> EffectSizes {
    let a = phi * (cells.m11 - cells.m1);
    let b = (1.0 - phi) * (cells.m22 - cells.m2);
    let denom = 2.0 * phi * (1.0 - phi);
    EffectSizes {
        overall: 0.5 * (cells.m1 + cells.m2),
        delta_tau: cells.m1 - cells.m2,
        delta_nu: (a - b) / denom,
        delta_pi: (a + b) / denom,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn null_effects_give_equal_cells() {
        let e = EffectSpec::continuous(0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let c = derive_cell_means(&e, 0.5).unwrap();
        for (_, v) in c.all() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn binary_reference_cells() {
        let e = EffectSpec::binary(0.5, 0.1, 0.1, 0.1).unwrap();
        let c = derive_cell_means(&e, 0.5).unwrap();
        assert!(close(c.m1, 0.55, 1e-15));
        assert!(close(c.m2, 0.45, 1e-15));
        assert!(close(c.m11, 0.65, 1e-15));
        assert!(close(c.m22, 0.45, 1e-15));

        let e = EffectSpec::binary(0.7, 0.15, -0.185, 0.297).unwrap();
        let c = derive_cell_means(&e, 0.56).unwrap();
        assert!(close(c.m1, 0.775, 1e-15));
        assert!(close(c.m2, 0.625, 1e-15));
        // m11 = 0.775 + 0.44 * 0.112, m22 = 0.625 + 0.56 * 0.482
        assert!(close(c.m11, 0.824_28, 1e-12));
        assert!(close(c.m22, 0.894_92, 1e-12));
    }

    #[test]
    fn recover_reference_effects() {
        let cells = CellMeans { m1: 0.55, m2: 0.45, m11: 0.65, m12: f64::NAN, m21: f64::NAN, m22: 0.45 };
        let e = recover_effects(&cells, 0.5);
        assert!(close(e.delta_nu, 0.1, 1e-12));
        assert!(close(e.delta_pi, 0.1, 1e-12));
        assert!(close(e.delta_tau, 0.1, 1e-12));

        let flat = CellMeans { m1: 3.0, m2: 3.0, m11: 3.0, m12: 3.0, m21: 3.0, m22: 3.0 };
        let e = recover_effects(&flat, 0.37);
        assert_eq!((e.delta_tau, e.delta_nu, e.delta_pi, e.overall), (0.0, 0.0, 0.0, 3.0));
    }

    #[test]
    fn unrealizable_binary_scenario_rejected() {
        let e = EffectSpec::binary(0.9, 0.1, 0.3, 0.3).unwrap();
        assert!(matches!(derive_cell_means(&e, 0.5), Err(Error::InvalidBinaryCells { .. })));
        // Boundary values are rejected too.
        let e = EffectSpec::binary(0.5, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(derive_cell_means(&e, 0.5), Err(Error::InvalidBinaryCells { cell: "m1", .. })));
    }

    #[test]
    fn parameter_validation() {
        assert!(EffectSpec::continuous(0.0, 0.2, 0.0, 0.0, 0.0).is_err());
        assert!(EffectSpec::continuous(0.0, f64::NAN, 0.0, 0.0, 1.0).is_err());
        let e = EffectSpec::continuous(0.0, 0.2, 0.0, 0.0, 1.0).unwrap();
        assert!(derive_cell_means(&e, 1.2).is_err());
        let info = InfoFractions::equally_spaced(3).unwrap();
        let err = DesignParams::new(0.5, 1.2, 0.05, 0.9, info, SpendingFamily::Pocock, Effect::Treatment).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "phi", .. }));
    }

    #[test]
    fn info_fraction_validation() {
        assert!(InfoFractions::new(vec![]).is_err());
        assert!(InfoFractions::new(vec![0.5, 0.4, 1.0]).is_err());
        assert!(InfoFractions::new(vec![0.5, 0.9]).is_err());
        assert!(InfoFractions::new(vec![0.0, 1.0]).is_err());
        let f = InfoFractions::equally_spaced(3).unwrap();
        assert_eq!(f.as_slice()[2], 1.0);
        let q: f64 = f.increments().iter().sum();
        assert!(close(q, 1.0, 1e-15));
    }

    #[test]
    fn enum_names_round_trip() {
        for e in Effect::ALL {
            assert_eq!(e.as_str().parse::<Effect>().unwrap(), e);
        }
        assert_eq!("OBF".parse::<SpendingFamily>().unwrap(), SpendingFamily::Obf);
        assert!("haybittle".parse::<SpendingFamily>().is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_mixture_identities(
            overall in -5.0..5.0f64,
            dt in -3.0..3.0f64,
            dn in -3.0..3.0f64,
            dp in -3.0..3.0f64,
            phi in 0.02..0.98f64,
        ) {
            let e = EffectSpec::continuous(overall, dt, dn, dp, 1.0).unwrap();
            let c = derive_cell_means(&e, phi).unwrap();
            let scale = 1.0 + overall.abs() + dt.abs() + dn.abs() + dp.abs();
            prop_assert!(close(c.m1, phi * c.m11 + (1.0 - phi) * c.m12, 1e-12 * scale));
            prop_assert!(close(c.m2, phi * c.m21 + (1.0 - phi) * c.m22, 1e-12 * scale));
            let r = recover_effects(&c, phi);
            prop_assert!(close(r.overall, overall, 1e-12 * scale));
            prop_assert!(close(r.delta_tau, dt, 1e-12 * scale));
            prop_assert!(close(r.delta_nu, dn, 1e-12 * scale));
            prop_assert!(close(r.delta_pi, dp, 1e-12 * scale));
        }

        #[test]
        fn no_selection_or_preference_means_flat_cells(
            overall in -5.0..5.0f64, dt in -3.0..3.0f64, phi in 0.02..0.98f64,
        ) {
            let e = EffectSpec::continuous(overall, dt, 0.0, 0.0, 2.0).unwrap();
            let c = derive_cell_means(&e, phi).unwrap();
            prop_assert!(close(c.m11, c.m1, 1e-12) && close(c.m12, c.m1, 1e-12));
            prop_assert!(close(c.m21, c.m2, 1e-12) && close(c.m22, c.m2, 1e-12));
        }
    }
}
