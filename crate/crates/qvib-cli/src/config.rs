//! Run configuration: defaults, config-file loading and flag overrides.

use anyhow::{bail, Context, Result};
use qvib::cost::{LookupConfig, LookupMode, QpeParams};
use qvib::grouping::GroupingAlgorithm;
use qvib::lcu::Representation;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Effective configuration of a run; embedded verbatim in every report so
/// outputs are self-describing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Target energy accuracy (hartree).
    pub epsilon: f64,
    /// Tucker per-SVD truncation threshold.
    pub eps_t: f64,
    /// Low-rank threshold per coupling tensor (hartree-weighted entries).
    pub eps_lr: f64,
    pub representation: Representation,
    pub lookup: LookupMode,
    /// 1 = clean-only look-up ancillae, 2 = dirty allowed.
    pub lookup_a: u64,
    pub lambda_c: u64,
    pub lambda_u: u64,
    pub grouping: GroupingAlgorithm,
    pub weighted: bool,
    pub c_lcu: f64,
    pub seconds_per_toffoli: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 4.5e-6,
            eps_t: 1e-10,
            eps_lr: 1e-8,
            representation: Representation::Triangular,
            lookup: LookupMode::Standard,
            lookup_a: 1,
            lambda_c: 1,
            lambda_u: 1,
            grouping: GroupingAlgorithm::Greedy,
            weighted: true,
            c_lcu: 0.5,
            seconds_per_toffoli: 0.040,
            seed: 7,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Self::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&mut self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            bail!("epsilon must be positive");
        }
        if !(self.eps_t.is_finite() && self.eps_t >= 0.0 && self.eps_lr.is_finite() && self.eps_lr >= 0.0) {
            bail!("thresholds must be non-negative");
        }
        if !(self.c_lcu > 0.0 && self.c_lcu < 1.0) {
            bail!("c_lcu must lie strictly between 0 and 1");
        }
        if !self.seconds_per_toffoli.is_finite() || self.seconds_per_toffoli <= 0.0 {
            bail!("seconds_per_toffoli must be positive");
        }
        Ok(())
    }

    pub fn lookup_config(&self) -> Result<LookupConfig> {
        Ok(match self.lookup {
            LookupMode::Standard => LookupConfig::standard(),
            LookupMode::SelectSwap => {
                LookupConfig::select_swap(self.lookup_a, self.lambda_c, self.lambda_u)?
            }
        })
    }

    pub fn qpe_params(&self, representation: Representation) -> Result<QpeParams> {
        Ok(QpeParams {
            representation,
            epsilon: self.epsilon,
            c_lcu: self.c_lcu,
            lookup: self.lookup_config()?,
            seconds_per_toffoli: self.seconds_per_toffoli,
        })
    }
}
