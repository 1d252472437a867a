//! The flat TOML configuration file and its mapping onto
//! [`ExperimentConfig`]. All keys are optional; missing keys take the
//! reference defaults, unknown keys are rejected.

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use wattmarket_core::clearing::Mechanism;
use wattmarket_core::engine::ExperimentConfig;
use wattmarket_core::learning::PolicyParams;
use wattmarket_core::market::{MarketConstants, Price};

/// Flat key-value view of an experiment configuration, in human units
/// (cents, kWh).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub mechanism: String,
    pub seed: u64,
    pub days: u32,
    pub n_buyers: u32,
    pub n_sellers: u32,
    pub n_prosumers: u32,
    pub hours: Vec<u8>,
    pub regen_prob: f64,
    pub k: f64,
    pub p_ur_cents: f64,
    pub p_fit_cents: f64,
    pub arm_prices_cents: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub policy_mix: [f64; 3],
    pub data: Option<PathBuf>,
    pub probes_per_class: u32,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile::from_experiment(&ExperimentConfig::default())
    }
}

impl ConfigFile {
    pub fn from_experiment(config: &ExperimentConfig) -> ConfigFile {
        ConfigFile {
            mechanism: config.mechanism.to_string(),
            seed: config.seed,
            days: config.n_days,
            n_buyers: config.n_buyers,
            n_sellers: config.n_sellers,
            n_prosumers: config.n_prosumers,
            hours: config.hours.clone(),
            regen_prob: config.regen_prob,
            k: config.constants.k,
            p_ur_cents: config.constants.p_ur.as_cents(),
            p_fit_cents: config.constants.p_fit.as_cents(),
            arm_prices_cents: config
                .constants
                .arm_prices
                .iter()
                .map(|p| p.as_cents())
                .collect(),
            epsilon: config.policy_params.epsilon,
            alpha: config.policy_params.alpha,
            policy_mix: config.policy_mix,
            data: config.data.clone(),
            probes_per_class: config.probes_per_class,
        }
    }

    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let mechanism: Mechanism = self
            .mechanism
            .parse()
            .map_err(|e: String| anyhow!("mechanism: {e}"))?;
        let arm_prices = self
            .arm_prices_cents
            .iter()
            .map(|c| Price::from_cents(*c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| anyhow!("arm_prices_cents: {e}"))?;
        let constants = MarketConstants::new(
            Price::from_cents(self.p_ur_cents).map_err(|e| anyhow!("p_ur_cents: {e}"))?,
            Price::from_cents(self.p_fit_cents).map_err(|e| anyhow!("p_fit_cents: {e}"))?,
            arm_prices,
            self.k,
        )
        .map_err(|e| anyhow!("{e}"))?;
        let config = ExperimentConfig {
            mechanism,
            constants,
            n_buyers: self.n_buyers,
            n_sellers: self.n_sellers,
            n_prosumers: self.n_prosumers,
            n_days: self.days,
            hours: self.hours.clone(),
            regen_prob: self.regen_prob,
            seed: self.seed,
            policy_mix: self.policy_mix,
            policy_params: PolicyParams {
                epsilon: self.epsilon,
                alpha: self.alpha,
            },
            data: self.data.clone(),
            probes_per_class: self.probes_per_class,
            probe_agents: None,
        };
        config.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Loads a config file (TOML; an empty or missing-keys file yields the
/// reference defaults) and rejects unknown keys.
pub fn load_config(path: &std::path::Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}
