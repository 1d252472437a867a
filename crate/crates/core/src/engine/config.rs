//! Experiment configuration and the hourly demand/supply means table.

use super::EngineError;
use crate::clearing::Mechanism;
use crate::learning::PolicyParams;
use crate::market::{default_constants, AgentId, MarketConstants};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Synthetic hourly means shipped with the crate. Demand follows the
/// rising 9 AM - 3 PM residential profile; supply is calibrated so the
/// demand/supply ratio is about 1 at 9:00, dips below 1 around midday when
/// PV output peaks, and climbs well above 1 by 15:00.
pub const BUNDLED_MEANS_CSV: &str = include_str!("../../data/hourly_means.csv");

const MEANS_HEADER: &str = "hour,demand_mean_kwh,supply_mean_kwh";

/// Mean demand and supply for one hour label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourMeans {
    pub hour: u8,
    pub demand_mean_kwh: f64,
    pub supply_mean_kwh: f64,
}

/// The per-hour means table driving type sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct MeansTable {
    rows: Vec<HourMeans>,
}

impl MeansTable {
    pub fn bundled() -> MeansTable {
        Self::from_csv_str(BUNDLED_MEANS_CSV, "<bundled>")
            .expect("bundled means table is well-formed")
    }

    pub fn load(path: &std::path::Path) -> Result<MeansTable, EngineError> {
        let text = std::fs::read_to_string(path).map_err(|source| EngineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    pub fn from_csv_str(text: &str, origin: &str) -> Result<MeansTable, EngineError> {
        let data_err = |message: String| EngineError::Data {
            path: origin.to_string(),
            message,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(header) if header.trim() == MEANS_HEADER => {}
            other => {
                return Err(data_err(format!(
                    "expected header '{MEANS_HEADER}', found {other:?}"
                )))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 3 {
                return Err(data_err(format!("row {}: expected 3 fields", i + 1)));
            }
            let hour: u8 = fields[0]
                .parse()
                .map_err(|e| data_err(format!("row {}: bad hour: {e}", i + 1)))?;
            let demand: f64 = fields[1]
                .parse()
                .map_err(|e| data_err(format!("row {}: bad demand: {e}", i + 1)))?;
            let supply: f64 = fields[2]
                .parse()
                .map_err(|e| data_err(format!("row {}: bad supply: {e}", i + 1)))?;
            if !demand.is_finite() || !supply.is_finite() || demand < 0.0 || supply < 0.0 {
                return Err(data_err(format!(
                    "row {}: means must be finite and non-negative",
                    i + 1
                )));
            }
            rows.push(HourMeans {
                hour,
                demand_mean_kwh: demand,
                supply_mean_kwh: supply,
            });
        }
        if rows.is_empty() {
            return Err(data_err("no data rows".into()));
        }
        Ok(MeansTable { rows })
    }

    pub fn for_hour(&self, hour: u8) -> Option<&HourMeans> {
        self.rows.iter().find(|r| r.hour == hour)
    }

    pub fn rows(&self) -> &[HourMeans] {
        &self.rows
    }
}

/// Declarative description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mechanism: Mechanism,
    pub constants: MarketConstants,
    pub n_buyers: u32,
    pub n_sellers: u32,
    pub n_prosumers: u32,
    /// Rounds per hour-auction (days).
    pub n_days: u32,
    /// Hour labels; each runs as an independent repeated auction.
    pub hours: Vec<u8>,
    /// Per-agent, per-round regeneration probability.
    pub regen_prob: f64,
    pub seed: u64,
    /// Probabilities of assigning UCB1 / UCB2 / epsilon-greedy.
    pub policy_mix: [f64; 3],
    pub policy_params: PolicyParams,
    /// Demand/supply means file; `None` uses the bundled table.
    pub data: Option<PathBuf>,
    /// Regret-diagnostic probes selected per class (0 disables).
    pub probes_per_class: u32,
    /// Explicit probe list; overrides `probes_per_class`.
    pub probe_agents: Option<Vec<AgentId>>,
}

impl Default for ExperimentConfig {
    /// The reference setup: 1,000 pure buyers, 1,000 pure sellers, 500
    /// prosumers, seven hourly auctions (9..15) of 365 rounds, 0.005
    /// regeneration, equal policy thirds.
    fn default() -> Self {
        ExperimentConfig {
            mechanism: Mechanism::KDouble,
            constants: default_constants(),
            n_buyers: 1000,
            n_sellers: 1000,
            n_prosumers: 500,
            n_days: 365,
            hours: (9..=15).collect(),
            regen_prob: 0.005,
            seed: 1,
            policy_mix: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            policy_params: PolicyParams::default(),
            data: None,
            probes_per_class: 0,
            probe_agents: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let cfg = |m: String| EngineError::Config(m);
        if let Err(e) = MarketConstants::new(
            self.constants.p_ur,
            self.constants.p_fit,
            self.constants.arm_prices.clone(),
            self.constants.k,
        ) {
            return Err(cfg(e.to_string()));
        }
        if !(0.0..=1.0).contains(&self.regen_prob) || !self.regen_prob.is_finite() {
            return Err(cfg("regen_prob must lie in [0, 1]".into()));
        }
        if self
            .policy_mix
            .iter()
            .any(|p| !(0.0..=1.0).contains(p) || !p.is_finite())
        {
            return Err(cfg("policy_mix entries must lie in [0, 1]".into()));
        }
        let total: f64 = self.policy_mix.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(cfg(format!("policy_mix must sum to 1, got {total}")));
        }
        if !(0.0..1.0).contains(&self.policy_params.epsilon) || self.policy_params.epsilon <= 0.0 {
            return Err(cfg("epsilon must lie in (0, 1)".into()));
        }
        if self.policy_params.alpha <= 0.0 || !self.policy_params.alpha.is_finite() {
            return Err(cfg("alpha must be positive".into()));
        }
        if self.hours.is_empty() {
            return Err(cfg("at least one hour label required".into()));
        }
        if self.n_days == 0 {
            return Err(cfg("n_days must be positive".into()));
        }
        Ok(())
    }

    pub fn total_agents(&self) -> u32 {
        self.n_buyers + self.n_sellers + self.n_prosumers
    }

    /// Loads the configured means table and checks it covers every
    /// configured hour.
    pub fn load_means(&self) -> Result<MeansTable, EngineError> {
        let table = match &self.data {
            Some(path) => MeansTable::load(path)?,
            None => MeansTable::bundled(),
        };
        for hour in &self.hours {
            if table.for_hour(*hour).is_none() {
                return Err(EngineError::Data {
                    path: self
                        .data
                        .as_ref()
                        .map_or("<bundled>".to_string(), |p| p.display().to_string()),
                    message: format!("no row for configured hour {hour}"),
                });
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_covers_the_default_hours() {
        let config = ExperimentConfig::default();
        let table = config.load_means().unwrap();
        assert_eq!(table.rows().len(), 7);
        assert_eq!(table.for_hour(9).unwrap().demand_mean_kwh, 1.448);
        assert_eq!(table.for_hour(15).unwrap().demand_mean_kwh, 3.449);
    }

    #[test]
    fn default_config_validates() {
        assert!(ExperimentConfig::default().validate().is_ok());
    }

    #[test]
    fn bad_policy_mix_is_rejected() {
        let config = ExperimentConfig {
            policy_mix: [0.5, 0.5, 0.5],
            ..ExperimentConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn missing_hour_row_is_a_data_error() {
        let config = ExperimentConfig {
            hours: vec![8],
            ..ExperimentConfig::default()
        };
        assert!(matches!(config.load_means(), Err(EngineError::Data { .. })));
    }

    #[test]
    fn short_or_malformed_csv_is_rejected() {
        assert!(MeansTable::from_csv_str("hour,demand_mean_kwh,supply_mean_kwh\n", "t").is_err());
        assert!(MeansTable::from_csv_str("wrong,header\n9,1,1\n", "t").is_err());
        assert!(
            MeansTable::from_csv_str("hour,demand_mean_kwh,supply_mean_kwh\n9,1.0\n", "t").is_err()
        );
        assert!(MeansTable::from_csv_str(
            "hour,demand_mean_kwh,supply_mean_kwh\n9,-1.0,2.0\n",
            "t"
        )
        .is_err());
    }
}
