use std::fmt;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::MAX_SITES;
use crate::recovery::CensusModel;
use crate::tolerance::Tolerances;

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SITES: RangeInclusive<usize> = 2..=7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Md,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Md),
            _ => Err(Error::Parse {
                kind: "output format",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Md => "md",
        })
    }
}

/// Everything a harness command needs; see [`RunConfig::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: Option<CensusModel>,
    pub min_sites: usize,
    pub max_sites: usize,
    pub seed: u64,
    pub trials: usize,
    pub tol: Tolerances,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: None,
            min_sites: *DEFAULT_SITES.start(),
            max_sites: *DEFAULT_SITES.end(),
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            tol: Tolerances::default(),
            format: OutputFormat::Json,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn with_sites(mut self, sites: RangeInclusive<usize>) -> Self {
        self.min_sites = *sites.start();
        self.max_sites = *sites.end();
        self
    }

    pub fn with_model(mut self, model: CensusModel) -> Self {
        self.model = Some(model);
        self
    }

    pub fn sites(&self) -> RangeInclusive<usize> {
        self.min_sites..=self.max_sites
    }

    /// Applies the command-line tolerance overrides.
    pub fn override_tolerances(&mut self, rank: Option<f64>, cluster: Option<f64>, proj: Option<f64>) {
        if let Some(v) = rank {
            self.tol.rank = v;
        }
        if let Some(v) = cluster {
            self.tol.cluster = v;
        }
        if let Some(v) = proj {
            self.tol.proj = v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_sites < 2 || self.max_sites > MAX_SITES || self.min_sites > self.max_sites {
            return Err(Error::InvalidConfig(format!(
                "chain lengths {}..={} must lie within 2..={MAX_SITES}",
                self.min_sites, self.max_sites
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        self.tol.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_ranges_and_trials() {
        assert!(RunConfig::default().with_sites(1..=3).validate().is_err());
        assert!(RunConfig::default().with_sites(5..=13).validate().is_err());
        let reversed = RunConfig {
            min_sites: 5,
            max_sites: 4,
            ..RunConfig::default()
        };
        assert!(reversed.validate().is_err());
        let no_trials = RunConfig {
            trials: 0,
            ..RunConfig::default()
        };
        assert!(no_trials.validate().is_err());
        let mut c = RunConfig::default();
        c.override_tolerances(Some(-1.0), None, None);
        assert!(c.validate().is_err());
    }

    #[test]
    fn formats_parse() {
        assert_eq!("MD".parse::<OutputFormat>().unwrap(), OutputFormat::Md);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
