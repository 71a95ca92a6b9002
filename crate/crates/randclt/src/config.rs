//! Experiment configuration.

use clap::ValueEnum;
use randclt_core::distance::{Metric, Target};
use serde::{Deserialize, Serialize};

use crate::descriptor::SystemDescriptor;
use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MetricName {
    Rho,
    RhoSq,
    Omega,
    OmegaSq,
    Kantorovich,
}

impl From<MetricName> for Metric {
    fn from(m: MetricName) -> Self {
        match m {
            MetricName::Rho => Metric::Rho,
            MetricName::RhoSq => Metric::RhoSq,
            MetricName::Omega => Metric::Omega,
            MetricName::OmegaSq => Metric::OmegaSq,
            MetricName::Kantorovich => Metric::Kantorovich,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum TargetName {
    Normal,
    Typical,
}

impl From<TargetName> for Target {
    fn from(t: TargetName) -> Self {
        match t {
            TargetName::Normal => Target::Normal,
            TargetName::Typical => Target::Typical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    pub format: Format,
}

/// Audits that can be requested by name.
pub const AUDITS: &[&str] =
    &["prop_3_1", "prop_9_1", "prop_11_1", "prop_11_2", "lemma_12_3", "chain", "two_sided_13_1"];
/// Predictions that can be requested by name.
pub const PREDICTIONS: &[&str] = &["prop42", "cor51", "thm11", "remark53"];
/// Bounds that can be requested by name.
pub const BOUNDS: &[&str] = &["thm12", "eq211", "eq81", "lemma23"];

fn default_n_theta() -> usize {
    2000
}
fn default_inner_budget() -> usize {
    1 << 16
}
fn default_mixture_samples() -> usize {
    256
}
fn default_pair_samples() -> usize {
    100_000
}

/// One experiment: the cross product of `n_list × metrics × targets` for a
/// system family, plus requested predictions, bounds and audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemDescriptor,
    #[serde(default)]
    pub n_list: Vec<usize>,
    pub metrics: Vec<MetricName>,
    pub targets: Vec<TargetName>,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    /// Grid size for interval-type Ω.
    #[serde(default = "default_inner_budget")]
    pub inner_budget: usize,
    /// Ceiling on the certified inner error; runs refuse when exceeded.
    #[serde(default)]
    pub max_inner_error: Option<f64>,
    /// Size of the |X| mixture behind the typical law of non-fixed-norm systems.
    #[serde(default = "default_mixture_samples")]
    pub mixture_samples: usize,
    /// Monte Carlo pairs for moment functionals of infinite Ω.
    #[serde(default = "default_pair_samples")]
    pub pair_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub audits: Vec<String>,
    #[serde(default)]
    pub predictions: Vec<String>,
    #[serde(default)]
    pub bounds: Vec<String>,
}

impl ExperimentConfig {
    pub fn new(system: SystemDescriptor, n_list: Vec<usize>, seed: u64) -> Self {
        Self {
            system,
            n_list,
            metrics: vec![MetricName::OmegaSq],
            targets: vec![TargetName::Normal],
            n_theta: default_n_theta(),
            inner_budget: default_inner_budget(),
            max_inner_error: None,
            mixture_samples: default_mixture_samples(),
            pair_samples: default_pair_samples(),
            seed,
            output: None,
            audits: Vec::new(),
            predictions: Vec::new(),
            bounds: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| crate::error::HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// The dimensions to run: `n_list`, or the descriptor's own system.
    pub fn dimensions(&self) -> Result<Vec<usize>> {
        if !self.n_list.is_empty() {
            return Ok(self.n_list.clone());
        }
        Ok(vec![self.system.build()?.n()])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() && self.system.build().is_err() {
            return config("n_list is empty and the system descriptor does not fix n");
        }
        if self.n_theta == 0 {
            return config("n_theta must be positive");
        }
        if self.inner_budget < 2 {
            return config("inner_budget must be at least 2");
        }
        for (list, known, what) in [
            (&self.audits, AUDITS, "audit"),
            (&self.predictions, PREDICTIONS, "prediction"),
            (&self.bounds, BOUNDS, "bound"),
        ] {
            for name in list {
                if !known.contains(&name.as_str()) {
                    return config(format!("unknown {what} {name:?}; expected one of {known:?}"));
                }
            }
        }
        Ok(())
    }
}
