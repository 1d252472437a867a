//! Agent population sampling and per-round quantity realization.

use super::config::{ExperimentConfig, MeansTable};
use super::rng::{substream, uniform_band, StreamKind};
use super::EngineError;
use crate::learning::{LearnerState, PolicyTag};
use crate::market::{AgentClass, AgentId, AgentTypeProfile, SignedQuantity};
use rand::Rng;

/// One agent's state for one hour-auction. Hour-auctions are independent
/// repeated games, so every hour carries its own type means and learner.
#[derive(Debug, Clone, PartialEq)]
pub struct HourAgentState {
    pub demand_mean: f64,
    pub supply_mean: f64,
    pub learner: LearnerState,
}

/// A live agent: fixed id and class, plus per-hour type and learning state.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRuntime {
    pub id: AgentId,
    pub class: AgentClass,
    pub hours: Vec<HourAgentState>,
}

impl AgentRuntime {
    pub fn type_profile(&self) -> AgentTypeProfile {
        AgentTypeProfile {
            mean_demand_per_hour: self.hours.iter().map(|h| h.demand_mean).collect(),
            mean_supply_per_hour: self.hours.iter().map(|h| h.supply_mean).collect(),
        }
    }
}

/// Draws a policy assignment from the configured mix.
pub(super) fn draw_policy<R: Rng>(rng: &mut R, mix: &[f64; 3]) -> PolicyTag {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (tag, share) in PolicyTag::ALL.iter().zip(mix) {
        acc += share;
        if u < acc {
            return *tag;
        }
    }
    PolicyTag::EpsGreedy
}

/// Draws an agent's type means for one hour: buyers (and prosumers) get a
/// demand mean uniform in +/-10% of the hour's demand mean, sellers (and
/// prosumers) a supply mean likewise.
pub(super) fn draw_hour_means<R: Rng>(
    rng: &mut R,
    class: AgentClass,
    hour: &super::config::HourMeans,
) -> (f64, f64) {
    let demand = match class {
        AgentClass::PureSeller => 0.0,
        _ => uniform_band(rng, hour.demand_mean_kwh),
    };
    let supply = match class {
        AgentClass::PureBuyer => 0.0,
        _ => uniform_band(rng, hour.supply_mean_kwh),
    };
    (demand, supply)
}

/// Samples the initial population: ids dense 0..N-1 with buyers first,
/// then sellers, then prosumers; type means drawn per hour; one policy per
/// agent from the configured mix, shared by all of its hour states.
pub fn sample_population(
    config: &ExperimentConfig,
    table: &MeansTable,
) -> Result<Vec<AgentRuntime>, EngineError> {
    let arm_count = config.constants.arm_count();
    let mut agents = Vec::with_capacity(config.total_agents() as usize);
    for raw_id in 0..config.total_agents() {
        let id = AgentId(raw_id);
        let class = if raw_id < config.n_buyers {
            AgentClass::PureBuyer
        } else if raw_id < config.n_buyers + config.n_sellers {
            AgentClass::PureSeller
        } else {
            AgentClass::Prosumer
        };
        let mut policy_rng = substream(config.seed, StreamKind::PolicyInit, 0, 0, raw_id as u64);
        let policy = draw_policy(&mut policy_rng, &config.policy_mix);
        let hours = config
            .hours
            .iter()
            .map(|hour| {
                let row = table
                    .for_hour(*hour)
                    .expect("hours checked against the table");
                let mut rng = substream(
                    config.seed,
                    StreamKind::TypeInit,
                    *hour as u64,
                    0,
                    raw_id as u64,
                );
                let (demand_mean, supply_mean) = draw_hour_means(&mut rng, class, row);
                HourAgentState {
                    demand_mean,
                    supply_mean,
                    learner: LearnerState::new(arm_count, policy),
                }
            })
            .collect();
        agents.push(AgentRuntime { id, class, hours });
    }
    Ok(agents)
}

/// Realizes every agent's signed net quantity for one round: buyers draw
/// demand in +/-10% of their type mean (negative), sellers supply
/// (positive), prosumers net supply minus demand with the sign deciding
/// the role. A zero net sits the round out.
pub fn realize_quantities(
    agents: &[AgentRuntime],
    hour_idx: usize,
    hour_label: u8,
    day: u32,
    seed: u64,
) -> Vec<SignedQuantity> {
    agents
        .iter()
        .map(|agent| realize_one(agent, hour_idx, hour_label, day, seed))
        .collect()
}

pub(super) fn realize_one(
    agent: &AgentRuntime,
    hour_idx: usize,
    hour_label: u8,
    day: u32,
    seed: u64,
) -> SignedQuantity {
    let state = &agent.hours[hour_idx];
    let mut rng = substream(
        seed,
        StreamKind::Quantity,
        hour_label as u64,
        day as u64,
        agent.id.0 as u64,
    );
    let kwh = match agent.class {
        AgentClass::PureBuyer => -uniform_band(&mut rng, state.demand_mean),
        AgentClass::PureSeller => uniform_band(&mut rng, state.supply_mean),
        AgentClass::Prosumer => {
            let demand = uniform_band(&mut rng, state.demand_mean);
            let supply = uniform_band(&mut rng, state.supply_mean);
            supply - demand
        }
    };
    SignedQuantity::from_kwh(kwh).expect("band draws are finite")
}
