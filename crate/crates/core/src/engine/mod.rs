//! The repeated-auction game loop: type sampling, role resolution,
//! bidding, clearing, reward feedback, and regeneration, all deterministic
//! under a seed.

mod config;
mod population;
mod rng;
mod round;

pub use config::{ExperimentConfig, HourMeans, MeansTable, BUNDLED_MEANS_CSV};
pub use population::{realize_quantities, sample_population, AgentRuntime, HourAgentState};
pub use rng::{substream, StreamKind};
pub use round::{counterfactual_rewards, population_profile, run_round, ProbeRound, RoundRecord};

use crate::market::AgentClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data file {path}: {message}")]
    Data { path: String, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Echo of what a finished experiment ran.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExperimentSummary {
    pub mechanism: crate::clearing::Mechanism,
    pub seed: u64,
    pub hours: Vec<u8>,
    pub days: u32,
    pub agent_count: u32,
    pub rounds_run: u32,
}

/// Runs the full experiment: for each configured hour label an independent
/// repeated auction of `n_days` rounds, streaming one [`RoundRecord`] per
/// round into `sink` in (hour, day) order.
pub fn run_experiment<F: FnMut(&RoundRecord)>(
    config: &ExperimentConfig,
    mut sink: F,
) -> Result<ExperimentSummary, EngineError> {
    config.validate()?;
    let table = config.load_means()?;
    let mut agents = sample_population(config, &table)?;
    let probes = select_probes(config, &agents);
    let mut rounds_run = 0;
    for hour_idx in 0..config.hours.len() {
        for day in 0..config.n_days {
            let record = run_round(&mut agents, hour_idx, day, config, &table, &probes);
            rounds_run += 1;
            sink(&record);
        }
    }
    Ok(ExperimentSummary {
        mechanism: config.mechanism,
        seed: config.seed,
        hours: config.hours.clone(),
        days: config.n_days,
        agent_count: agents.len() as u32,
        rounds_run,
    })
}

/// Probe agents for the regret diagnostic: an explicit list when given,
/// otherwise the first `probes_per_class` ids of each class.
fn select_probes(
    config: &ExperimentConfig,
    agents: &[AgentRuntime],
) -> Vec<crate::market::AgentId> {
    if let Some(explicit) = &config.probe_agents {
        let mut probes = explicit.clone();
        probes.sort();
        probes.dedup();
        return probes;
    }
    let mut probes = Vec::new();
    if config.probes_per_class == 0 {
        return probes;
    }
    for class in [
        AgentClass::PureBuyer,
        AgentClass::PureSeller,
        AgentClass::Prosumer,
    ] {
        probes.extend(
            agents
                .iter()
                .filter(|a| a.class == class)
                .take(config.probes_per_class as usize)
                .map(|a| a.id),
        );
    }
    probes.sort();
    probes
}
