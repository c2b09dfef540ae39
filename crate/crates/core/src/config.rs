//! Run configuration: flat `key = value` files, overridden by CLI flags.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equilibrium::SearchConfig;
use crate::error::{Error, Result};
use crate::receiver::{PosteriorTie, TieRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Parse(format!("output_format: expected `csv` or `json`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid_points: usize,
    pub deviation_step: f64,
    pub profit_threshold: f64,
    pub tie_rule: TieRule,
    /// `None` leaves the choice to the subcommand.
    pub output_format: Option<OutputFormat>,
    pub parallel: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            deviation_step: 0.005,
            profit_threshold: 1e-4,
            tie_rule: TieRule::Fair,
            output_format: None,
            parallel: true,
            seed: 0,
        }
    }
}

/// Every key is optional; absent keys keep their current value.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub grid_points: Option<usize>,
    pub deviation_step: Option<f64>,
    pub profit_threshold: Option<f64>,
    pub tie_rule: Option<String>,
    pub output_format: Option<String>,
    pub parallel: Option<bool>,
    pub seed: Option<u64>,
}

impl ConfigOverrides {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(ConfigOverrides::parse(text)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(ConfigOverrides::load(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overwrites the keys present in `o`; call [`RunConfig::validate`]
    /// once all layers are applied.
    pub fn apply(&mut self, o: ConfigOverrides) -> Result<()> {
        if let Some(v) = o.grid_points {
            self.grid_points = v;
        }
        if let Some(v) = o.deviation_step {
            self.deviation_step = v;
        }
        if let Some(v) = o.profit_threshold {
            self.profit_threshold = v;
        }
        if let Some(v) = o.tie_rule {
            self.tie_rule = v
                .parse()
                .map_err(|_| Error::Parse(format!("tie_rule: expected fair, sender1 or sender2, got `{v}`")))?;
        }
        if let Some(v) = o.output_format {
            self.output_format = Some(v.parse()?);
        }
        if let Some(v) = o.parallel {
            self.parallel = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 || self.grid_points % 2 == 0 {
            return Err(Error::InvalidParams(format!(
                "grid_points must be odd and at least 3, got {}",
                self.grid_points
            )));
        }
        if !(self.deviation_step > 0.0 && self.deviation_step < 1.0) {
            return Err(Error::InvalidParams(format!(
                "deviation_step must lie in (0, 1), got {}",
                self.deviation_step
            )));
        }
        if !(self.profit_threshold > 0.0 && self.profit_threshold.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "profit_threshold must be positive, got {}",
                self.profit_threshold
            )));
        }
        Ok(())
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            grid_points: self.grid_points,
            deviation_step: self.deviation_step,
            profit_threshold: self.profit_threshold,
            order_tie: self.tie_rule,
            posterior_tie: PosteriorTie::FirstVisited,
            parallel: self.parallel,
        }
    }
}
