//! Experiment configuration read by the command line front end.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compare::CompareOptions;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::priors::PriorSpec;
use crate::sampler::SamplerConfig;
use crate::study::{StudyConfig, StudyPreset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Fit,
    Compare,
    Study,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Fit => "fit",
            Command::Compare => "compare",
            Command::Study => "study",
        }
    }
}

/// Named model/prior combinations for `fit` and `compare`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitPreset {
    /// Constant-rate Poisson process with a `Gamma(1, 1)` rate prior.
    Hpp,
    /// Log-linear GP background with exponential excitation, on the preset dataset
    /// unless `data` is given.
    EvoLgcp,
    /// Daily harmonic plus a 100-cell GP background with exponential excitation.
    Crime,
}

/// Where the event times come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Pattern CSV with a `time_hours` column.
    Pattern { path: PathBuf },
    /// Crime-portal style event table.
    Events(EventFilter),
    /// Events listed inline.
    Inline { events: Vec<f64>, horizon: f64 },
}

fn default_jitter() -> f64 {
    30.0
}

fn violent_types() -> Vec<String> {
    ["HOMICIDE", "ASSAULT", "ROBBERY"].iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventFilter {
    pub path: PathBuf,
    #[serde(default)]
    pub district: Option<u32>,
    /// Matched case-insensitively against `Primary Type`.
    #[serde(default = "violent_types")]
    pub primary_types: Vec<String>,
    /// Defaults to the year of the first retained row.
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default = "default_jitter")]
    pub jitter_seconds: f64,
}

impl EventFilter {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            district: None,
            primary_types: violent_types(),
            year: None,
            jitter_seconds: default_jitter(),
        }
    }
}

fn default_budget() -> usize {
    1_000_000
}

fn default_lookahead() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub horizon: Option<f64>,
    /// Simulate from a study cell instead of `model`.
    #[serde(default)]
    pub study_cell: Option<StudyCellRef>,
    #[serde(default = "default_lookahead")]
    pub lookahead_scale: f64,
    #[serde(default = "default_budget")]
    pub event_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyCellRef {
    pub preset: StudyPreset,
    pub label: String,
}

/// One candidate in a `compare` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedModel {
    pub name: String,
    pub model: ModelSpec,
    pub priors: PriorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must agree with the subcommand when present.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: Option<DataSource>,
    #[serde(default)]
    pub preset: Option<FitPreset>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub priors: Option<PriorSpec>,
    #[serde(default)]
    pub models: Vec<NamedModel>,
    #[serde(default)]
    pub sampler: Option<SamplerConfig>,
    #[serde(default)]
    pub simulation: Option<SimulationBlock>,
    #[serde(default)]
    pub comparison: Option<CompareOptions>,
    #[serde(default)]
    pub study: Option<StudyConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that the blocks needed by `command` are present and consistent.
    pub fn validate_for(&self, command: Command) -> Result<()> {
        if let Some(c) = self.command {
            if c != command {
                return Err(Error::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        if let Some(s) = &self.sampler {
            s.validate()?;
        }
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("`{}` needs {what}", command.name())))
            }
        };
        match command {
            Command::Simulate => {
                let sim = self.simulation.as_ref();
                let from_cell = sim.is_some_and(|s| s.study_cell.is_some());
                need(self.model.is_some() != from_cell, "exactly one of `model` or `simulation.study_cell`")?;
                if !from_cell {
                    need(sim.and_then(|s| s.horizon).is_some(), "`simulation.horizon`")?;
                }
                if let Some(m) = &self.model {
                    m.validate()?;
                }
            }
            Command::Fit => {
                match (self.preset, &self.model) {
                    (Some(_), Some(_)) => need(false, "either `preset` or `model`, not both")?,
                    (None, None) => need(false, "`preset` or `model`")?,
                    (None, Some(m)) => {
                        m.validate()?;
                        need(self.priors.is_some(), "`priors` with a custom model")?;
                    }
                    (Some(p), None) => need(
                        self.data.is_some() || p == FitPreset::EvoLgcp,
                        "`data` for this preset",
                    )?,
                }
                if let (Some(m), Some(pr)) = (&self.model, &self.priors) {
                    pr.validate_for(m)?;
                }
            }
            Command::Compare => {
                need(self.data.is_some(), "`data`")?;
                need(!self.models.is_empty(), "a non-empty `models` list")?;
                let mut names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
                names.sort_unstable();
                names.dedup();
                need(names.len() == self.models.len(), "distinct model names")?;
                for m in &self.models {
                    m.model.validate()?;
                    m.priors.validate_for(&m.model)?;
                }
            }
            Command::Study => {
                need(self.study.is_some(), "a `study` block")?;
                self.study.as_ref().unwrap().resolved_cells()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"seed": 1, "colour": "red"}"#).is_err());
        let e = ExperimentConfig::from_json(r#"{"sampler": {"iterations": 10}}"#).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn events_source_defaults() {
        let c = ExperimentConfig::from_json(
            r#"{"preset": "crime", "data": {"source": "events", "path": "x.csv", "district": 11}}"#,
        )
        .unwrap();
        match c.data.unwrap() {
            DataSource::Events(f) => {
                assert_eq!(f.jitter_seconds, 30.0);
                assert_eq!(f.primary_types.len(), 3);
                assert_eq!(f.district, Some(11));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn command_blocks_checked() {
        let c = ExperimentConfig::from_json(r#"{"command": "fit", "preset": "hpp"}"#).unwrap();
        assert!(c.validate_for(Command::Simulate).is_err());
        assert!(c.validate_for(Command::Fit).is_err());
        let c = ExperimentConfig::from_json(r#"{"preset": "evo_lgcp"}"#).unwrap();
        assert!(c.validate_for(Command::Fit).is_ok());
        let c = ExperimentConfig::from_json(
            r#"{"model": {"background": {"form": "constant", "mu": 1},
                "kernel": {"family": "none"}, "link": {"link": "power", "eta": 1}},
                "simulation": {"horizon": 100}}"#,
        )
        .unwrap();
        assert!(c.validate_for(Command::Simulate).is_ok());
    }
}
