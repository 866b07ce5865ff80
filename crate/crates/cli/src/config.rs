use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use prefseq_core::simulation::SweepGrid;
use prefseq_core::{DesignParams, Effect, EffectSpec, Hypothesis, InfoFractions, Outcome, SpendingFamily};

/// A user error in flags or the config file; exits with status 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Text,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub outcome: Outcome,
    pub effect: Effect,
    pub overall: f64,
    pub delta_tau: f64,
    pub delta_nu: f64,
    pub delta_pi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub phi: f64,
    pub theta: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub power: f64,
    pub looks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub info_fractions: Option<Vec<f64>>,
    pub spending: Vec<SpendingFamily>,
    pub hypothesis: Hypothesis,
    pub nsim: u64,
    pub seed: u64,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub sweep_phi: Vec<f64>,
    pub sweep_theta: Vec<f64>,
    pub sweep_size: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            outcome: Outcome::Continuous,
            effect: Effect::Treatment,
            overall: 0.0,
            delta_tau: 0.0,
            delta_nu: 0.0,
            delta_pi: 0.0,
            sigma: None,
            phi: 0.5,
            theta: 0.5,
            zeta: DesignParams::DEFAULT_ZETA,
            alpha: 0.05,
            power: 0.9,
            looks: 3,
            info_fractions: None,
            spending: vec![SpendingFamily::Pocock, SpendingFamily::Obf],
            hypothesis: Hypothesis::Alternative,
            nsim: 10_000,
            seed: 1,
            workers: 1,
            out: None,
            format: Format::Csv,
            sweep_phi: Vec::new(),
            sweep_theta: Vec::new(),
            sweep_size: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    Null,
    Alternative,
}

/// Flags shared by every subcommand. Unset flags keep the config-file or
/// default value.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML file with any of the settings below; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,

    #[arg(long, value_parser = parse_outcome)]
    pub outcome: Option<Outcome>,
    /// Effect the trial is sized and tested for.
    #[arg(long, value_parser = parse_effect)]
    pub effect: Option<Effect>,
    /// Overall mean (continuous) or response proportion (binary).
    #[arg(long, allow_hyphen_values = true)]
    pub overall: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_pi: Option<f64>,
    /// Residual standard deviation (continuous only; default 1).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Preference rate for treatment 1.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Fraction randomized to the choice arm.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Second-stage randomization fraction to treatment 1.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Two-sided type I error.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub power: Option<f64>,
    /// Number of analyses, equally spaced unless --info-fractions is given.
    #[arg(long)]
    pub looks: Option<usize>,
    /// Cumulative information fractions, e.g. 0.3,0.6,1.
    #[arg(long, value_delimiter = ',')]
    pub info_fractions: Option<Vec<f64>>,
    /// Spending families, e.g. pocock,obf.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub spending: Option<Vec<SpendingFamily>>,
    #[arg(long, value_enum)]
    pub hypothesis: Option<HypothesisArg>,
    #[arg(long)]
    pub nsim: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write results to this file.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_phi: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_theta: Option<Vec<f64>>,
    /// Values of the tested effect to sweep over.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sweep_size: Option<Vec<f64>>,
}

fn parse_outcome(s: &str) -> std::result::Result<Outcome, String> {
    s.parse().map_err(|e: prefseq_core::Error| e.to_string())
}

fn parse_effect(s: &str) -> std::result::Result<Effect, String> {
    s.parse().map_err(|e: prefseq_core::Error| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<SpendingFamily, String> {
    s.parse().map_err(|e: prefseq_core::Error| e.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Invalid(format!("config: {}", e.message())).into())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = &o.$field { c.$field = v.clone(); } )* };
        }
        take!(outcome, effect, overall, delta_tau, delta_nu, delta_pi, phi, theta, zeta, alpha, power);
        take!(looks, spending, nsim, seed, workers, format, sweep_phi, sweep_theta, sweep_size);
        if o.sigma.is_some() {
            c.sigma = o.sigma;
        }
        if o.info_fractions.is_some() {
            c.info_fractions = o.info_fractions.clone();
        }
        if o.out.is_some() {
            c.out = o.out.clone();
        }
        if let Some(h) = o.hypothesis {
            c.hypothesis = match h {
                HypothesisArg::Null => Hypothesis::Null,
                HypothesisArg::Alternative => Hypothesis::Alternative,
            };
        }
        if let (Some(f), None) = (&o.info_fractions, o.looks) {
            c.looks = f.len();
        }
        Ok(c)
    }

    pub fn info(&self) -> Result<InfoFractions> {
        match &self.info_fractions {
            Some(f) if f.len() != self.looks => Err(Invalid(format!(
                "invalid looks: {} analyses but {} information fractions",
                self.looks,
                f.len()
            ))
            .into()),
            Some(f) => Ok(InfoFractions::new(f.clone())?),
            None => Ok(InfoFractions::equally_spaced(self.looks)?),
        }
    }

    pub fn effects(&self) -> Result<EffectSpec> {
        let spec = match self.outcome {
            Outcome::Continuous => EffectSpec::continuous(
                self.overall,
                self.delta_tau,
                self.delta_nu,
                self.delta_pi,
                self.sigma.unwrap_or(1.0),
            )?,
            Outcome::Binary => {
                if self.sigma.is_some() {
                    return Err(Invalid("invalid sigma: not used for binary outcomes".into()).into());
                }
                EffectSpec::binary(self.overall, self.delta_tau, self.delta_nu, self.delta_pi)?
            }
        };
        Ok(spec)
    }

    pub fn params(&self, spending: SpendingFamily) -> Result<DesignParams> {
        let mut p = DesignParams::new(self.theta, self.phi, self.alpha, self.power, self.info()?, spending, self.effect)?;
        p.zeta = self.zeta;
        p.validate()?;
        Ok(p)
    }

    pub fn families(&self) -> Result<Vec<SpendingFamily>> {
        if self.spending.is_empty() {
            return Err(Invalid("invalid spending: at least one family is required".into()).into());
        }
        Ok(self.spending.clone())
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid> {
        let families = self.families()?;
        let mut grid = SweepGrid::single(self.params(families[0])?, self.effects()?, self.hypothesis);
        grid.phis = self.sweep_phi.clone();
        grid.thetas = self.sweep_theta.clone();
        grid.sizes = self.sweep_size.clone();
        grid.families = families;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn populated_round_trips() {
        let c = RunConfig {
            outcome: Outcome::Binary,
            effect: Effect::Preference,
            overall: 0.7,
            delta_tau: 0.15,
            delta_nu: -0.185,
            delta_pi: 0.297,
            phi: 0.56,
            info_fractions: Some(vec![0.25, 0.6, 1.0]),
            spending: vec![SpendingFamily::Obf],
            hypothesis: Hypothesis::Null,
            out: Some(PathBuf::from("out/run.csv")),
            format: Format::Text,
            sweep_theta: vec![0.1, 1.0 / 3.0],
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_toml("phi = 0.3\nspending = [\"obf\"]\n").unwrap();
        assert_eq!(c.phi, 0.3);
        assert_eq!(c.spending, vec![SpendingFamily::Obf]);
        assert_eq!(c.looks, 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("phii = 0.3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("prefseq-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "phi = 0.3\ntheta = 0.7\n").unwrap();
        let o = Overrides { config: Some(path), phi: Some(0.6), ..Overrides::default() };
        let c = RunConfig::resolve(&o).unwrap();
        assert_eq!((c.phi, c.theta), (0.6, 0.7));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn info_fraction_count_must_match_looks() {
        let c = RunConfig { looks: 2, info_fractions: Some(vec![0.5, 0.8, 1.0]), ..RunConfig::default() };
        assert!(c.info().is_err());
    }
}
