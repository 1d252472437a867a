//! One auction round: realize quantities, bid, clear, reward, update,
//! regenerate.

use super::config::{ExperimentConfig, MeansTable};
use super::population::{draw_hour_means, draw_policy, realize_one, AgentRuntime};
use super::rng::{substream, StreamKind};
use crate::clearing::{build_stacks, ClearingOutcome, Mechanism};
use crate::learning::{normalized_reward, update_state, LearnerState, PolicyTag, RoundResult};
use crate::market::{AgentId, MarketConstants, Order, Qty, SignedQuantity};
use rand::Rng;

/// A probe agent's regret diagnostic for one round: its reward at every
/// counterfactual arm, with the rest of the book held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRound {
    pub agent: AgentId,
    pub policy: PolicyTag,
    pub played_arm: usize,
    pub realized_reward: f64,
    pub counterfactual: Vec<f64>,
}

/// Full trace of one auction round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub day: u32,
    pub hour: u8,
    pub orders: Vec<Order>,
    pub outcome: ClearingOutcome,
    /// (agent, normalized reward) for every active agent, id-ascending.
    pub rewards: Vec<(AgentId, f64)>,
    /// Histogram of arm choices over active agents.
    pub profile: Vec<f64>,
    /// Total demand kWh / total supply kWh this round.
    pub demand_supply_ratio: f64,
    pub regenerated: Vec<AgentId>,
    pub probes: Vec<ProbeRound>,
}

/// Runs one round of the hour-auction `hour_idx`, mutating learner states
/// and applying the end-of-round regeneration sweep.
///
/// Sequence: (1) realize signed quantities; (2) every active agent selects
/// an arm on its hour-specific learner state and submits an order at that
/// arm's price; (3) the configured mechanism clears the book; (4) residuals
/// go to the utility; (5) normalized rewards; (6) state updates; (7) each
/// agent independently regenerates with probability `regen_prob`: its
/// learner state for this hour-auction zeroes, its type resamples within
/// the same class, and its policy is re-drawn. Probe agents are exempt from
/// regeneration so their regret diagnostic spans the whole horizon.
pub fn run_round(
    agents: &mut [AgentRuntime],
    hour_idx: usize,
    day: u32,
    config: &ExperimentConfig,
    table: &MeansTable,
    probes: &[AgentId],
) -> RoundRecord {
    let hour_label = config.hours[hour_idx];
    let constants = &config.constants;
    let seed = config.seed;

    // (1) + (2): realize and bid.
    let mut orders = Vec::with_capacity(agents.len());
    let mut played: Vec<Option<(SignedQuantity, usize)>> = vec![None; agents.len()];
    for (i, agent) in agents.iter_mut().enumerate() {
        let q = realize_one(agent, hour_idx, hour_label, day, seed);
        let side = match q.side() {
            Some(side) => side,
            None => continue,
        };
        let mut arm_rng = substream(
            seed,
            StreamKind::ArmSelect,
            hour_label as u64,
            day as u64,
            agent.id.0 as u64,
        );
        let learner = &mut agent.hours[hour_idx].learner;
        let arm = learner.choose(&config.policy_params, &mut arm_rng);
        orders.push(Order {
            agent: agent.id,
            side,
            price: constants.price_of_arm(arm),
            quantity: q.magnitude(),
        });
        played[i] = Some((q, arm));
    }

    // (3) + (4): clear; residuals are routed inside the outcome.
    let stacks = build_stacks(&orders);
    let outcome = config.mechanism.clear(&stacks, constants);

    // (5) + (6): rewards and state updates.
    let mut rewards = Vec::with_capacity(orders.len());
    for (i, agent) in agents.iter_mut().enumerate() {
        let Some((q, arm)) = played[i] else { continue };
        let result = round_result_for(&outcome, agent.id, q);
        let reward =
            normalized_reward(&result, constants).expect("active agents have nonzero quantity");
        update_state(&mut agent.hours[hour_idx].learner, arm, reward)
            .expect("normalized rewards lie in [0, 1]");
        rewards.push((agent.id, reward));
    }

    // Probe diagnostics before regeneration can reset their learners.
    let mut probe_rounds = Vec::new();
    for probe in probes {
        let i = probe.0 as usize;
        let Some((_q, arm)) = played.get(i).copied().flatten() else {
            continue;
        };
        let counterfactual = counterfactual_rewards(&orders, *probe, config.mechanism, constants);
        probe_rounds.push(ProbeRound {
            agent: *probe,
            policy: agents[i].hours[hour_idx].learner.policy,
            played_arm: arm,
            realized_reward: rewards
                .iter()
                .find(|(id, _)| id == probe)
                .map(|(_, r)| *r)
                .unwrap_or(0.0),
            counterfactual,
        });
    }

    let profile = population_profile(&orders, constants);
    let demand_supply_ratio = ratio(&outcome);

    // (7): regeneration sweep, hour-local so hour-auctions stay
    // independent.
    let mut regenerated = Vec::new();
    if config.regen_prob > 0.0 {
        let row = table
            .for_hour(hour_label)
            .expect("hours checked against the table");
        for agent in agents.iter_mut() {
            if probes.binary_search(&agent.id).is_ok() {
                continue;
            }
            let mut rng = substream(
                seed,
                StreamKind::Regeneration,
                hour_label as u64,
                day as u64,
                agent.id.0 as u64,
            );
            if rng.random::<f64>() >= config.regen_prob {
                continue;
            }
            let (demand_mean, supply_mean) = draw_hour_means(&mut rng, agent.class, row);
            let policy = draw_policy(&mut rng, &config.policy_mix);
            let state = &mut agent.hours[hour_idx];
            state.demand_mean = demand_mean;
            state.supply_mean = supply_mean;
            state.learner = LearnerState::new(constants.arm_count(), policy);
            regenerated.push(agent.id);
        }
    }

    RoundRecord {
        day,
        hour: hour_label,
        orders,
        outcome,
        rewards,
        profile,
        demand_supply_ratio,
        regenerated,
        probes: probe_rounds,
    }
}

fn ratio(outcome: &ClearingOutcome) -> f64 {
    let demand: Qty = outcome
        .agents
        .iter()
        .filter(|a| a.side == crate::market::Side::Buy)
        .map(|a| a.submitted)
        .sum();
    let supply = outcome.total_supply();
    if supply.is_zero() {
        if demand.is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        demand.as_kwh() / supply.as_kwh()
    }
}

/// Histogram of the arm choices of all active agents: f(m) = share of
/// orders at arm m's price. Sums to one whenever every order is on the arm
/// grid (always true for learner-produced books).
pub fn population_profile(orders: &[Order], constants: &MarketConstants) -> Vec<f64> {
    let mut histogram = vec![0.0; constants.arm_count()];
    if orders.is_empty() {
        return histogram;
    }
    let weight = 1.0 / orders.len() as f64;
    for order in orders {
        if let Some(arm) = constants.arm_of_price(order.price) {
            histogram[arm] += weight;
        } else {
            debug_assert!(false, "engine books always bid on the arm grid");
        }
    }
    histogram
}

/// Re-clears the round M times with only the probe's price changed to each
/// arm, everything else fixed; returns the probe's normalized reward per
/// arm. The probe's own arm reproduces the realized book exactly.
pub fn counterfactual_rewards(
    orders: &[Order],
    probe: AgentId,
    mechanism: Mechanism,
    constants: &MarketConstants,
) -> Vec<f64> {
    use crate::clearing::{ask_order, bid_order, build_stacks_presorted};
    use crate::market::Side;

    let probe_order = *orders
        .iter()
        .find(|o| o.agent == probe)
        .expect("probe is active this round");
    let signed = match probe_order.side {
        Side::Buy => SignedQuantity::buying(probe_order.quantity),
        Side::Sell => SignedQuantity::selling(probe_order.quantity),
    };

    // Sort each side once; per arm the probe's order is re-inserted at its
    // new position, avoiding a full re-sort of the 2,500-order book.
    let mut bids: Vec<Order> = orders
        .iter()
        .filter(|o| o.side == Side::Buy)
        .copied()
        .collect();
    let mut asks: Vec<Order> = orders
        .iter()
        .filter(|o| o.side == Side::Sell)
        .copied()
        .collect();
    bids.sort_by(bid_order);
    asks.sort_by(ask_order);
    let own_side = match probe_order.side {
        Side::Buy => &mut bids,
        Side::Sell => &mut asks,
    };
    let at = own_side
        .iter()
        .position(|o| o.agent == probe)
        .expect("probe order present");
    own_side.remove(at);

    let mut out = Vec::with_capacity(constants.arm_count());
    let mut scratch = Vec::with_capacity(own_side.len() + 1);
    for arm in 0..constants.arm_count() {
        let mut candidate = probe_order;
        candidate.price = constants.price_of_arm(arm);
        let own_side = match probe_order.side {
            Side::Buy => &bids,
            Side::Sell => &asks,
        };
        let pos = own_side
            .binary_search_by(|o| match probe_order.side {
                Side::Buy => bid_order(o, &candidate),
                Side::Sell => ask_order(o, &candidate),
            })
            .unwrap_or_else(|p| p);
        scratch.clear();
        scratch.extend_from_slice(&own_side[..pos]);
        scratch.push(candidate);
        scratch.extend_from_slice(&own_side[pos..]);
        let stacks = match probe_order.side {
            Side::Buy => build_stacks_presorted(&scratch, &asks),
            Side::Sell => build_stacks_presorted(&bids, &scratch),
        };
        let outcome = mechanism.clear(&stacks, constants);
        let result = round_result_for(&outcome, probe, signed);
        out.push(normalized_reward(&result, constants).expect("probe has nonzero quantity"));
    }
    out
}

/// Maps an agent's clearing outcome to its reward inputs.
pub(crate) fn round_result_for(
    outcome: &ClearingOutcome,
    agent: AgentId,
    signed: SignedQuantity,
) -> RoundResult {
    match outcome.agent(agent) {
        Some(fills) => RoundResult {
            signed_quantity: signed,
            fills: fills.fills.iter().map(|f| (f.quantity, f.price)).collect(),
            utility_quantity: fills.uncleared,
        },
        None => RoundResult {
            signed_quantity: signed,
            fills: Vec::new(),
            utility_quantity: signed.magnitude(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::population::sample_population;
    use crate::market::Side;

    #[test]
    fn population_profile_counts_arm_shares() {
        let constants = crate::market::default_constants();
        let order = |agent: u32, arm: usize| Order {
            agent: AgentId(agent),
            side: Side::Buy,
            price: constants.price_of_arm(arm),
            quantity: Qty::from_kwh(1.0).unwrap(),
        };
        let profile = population_profile(&[order(0, 2), order(1, 2), order(2, 5)], &constants);
        assert!((profile[2] - 2.0 / 3.0).abs() < 1e-12);
        assert!((profile[5] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(profile.iter().filter(|p| **p > 0.0).count(), 2);
        assert!(population_profile(&[], &constants)
            .iter()
            .all(|p| *p == 0.0));
    }

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            n_buyers: 20,
            n_sellers: 20,
            n_prosumers: 10,
            n_days: 10,
            hours: vec![9],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn fresh_ucb_population_bids_arm_zero() {
        let mut config = tiny_config();
        // Force every agent onto UCB1 so the initialization phase is
        // deterministic: everyone plays arm 0 in round one.
        config.policy_mix = [1.0, 0.0, 0.0];
        let table = config.load_means().unwrap();
        let mut agents = sample_population(&config, &table).unwrap();
        let record = run_round(&mut agents, 0, 0, &config, &table, &[]);
        let arm0 = config.constants.price_of_arm(0);
        assert!(!record.orders.is_empty());
        assert!(record.orders.iter().all(|o| o.price == arm0));
        // All mass on arm 0 in the profile.
        assert!((record.profile[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_regen_keeps_types_static() {
        let mut config = tiny_config();
        config.regen_prob = 0.0;
        let table = config.load_means().unwrap();
        let mut agents = sample_population(&config, &table).unwrap();
        let before: Vec<(f64, f64)> = agents
            .iter()
            .map(|a| (a.hours[0].demand_mean, a.hours[0].supply_mean))
            .collect();
        for day in 0..10 {
            let record = run_round(&mut agents, 0, day, &config, &table, &[]);
            assert!(record.regenerated.is_empty());
        }
        let after: Vec<(f64, f64)> = agents
            .iter()
            .map(|a| (a.hours[0].demand_mean, a.hours[0].supply_mean))
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn full_regen_resets_learners_every_round() {
        let mut config = tiny_config();
        config.regen_prob = 1.0;
        let table = config.load_means().unwrap();
        let mut agents = sample_population(&config, &table).unwrap();
        let record = run_round(&mut agents, 0, 0, &config, &table, &[]);
        assert_eq!(record.regenerated.len(), agents.len());
        for agent in &agents {
            assert_eq!(agent.hours[0].learner.total_pulls, 0);
        }
    }

    #[test]
    fn rewards_are_recorded_for_every_active_agent() {
        let config = tiny_config();
        let table = config.load_means().unwrap();
        let mut agents = sample_population(&config, &table).unwrap();
        let record = run_round(&mut agents, 0, 0, &config, &table, &[]);
        assert_eq!(record.rewards.len(), record.orders.len());
        assert!(record.rewards.iter().all(|(_, r)| (0.0..=1.0).contains(r)));
        // Profile over active agents sums to one.
        let total: f64 = record.profile.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn counterfactual_at_the_played_arm_reproduces_the_reward() {
        let config = tiny_config();
        let table = config.load_means().unwrap();
        let mut agents = sample_population(&config, &table).unwrap();
        let probes = vec![AgentId(0), AgentId(25)];
        let record = run_round(&mut agents, 0, 0, &config, &table, &probes);
        assert!(!record.probes.is_empty());
        for probe in &record.probes {
            assert_eq!(probe.counterfactual.len(), config.constants.arm_count());
            assert!(probe.counterfactual.iter().all(|r| (0.0..=1.0).contains(r)));
            assert_eq!(
                probe.counterfactual[probe.played_arm], probe.realized_reward,
                "probe's own arm must reproduce the realized reward exactly"
            );
        }
    }

    #[test]
    fn buyers_and_sellers_never_overlap() {
        let config = tiny_config();
        let table = config.load_means().unwrap();
        let mut agents = sample_population(&config, &table).unwrap();
        for day in 0..5 {
            let record = run_round(&mut agents, 0, day, &config, &table, &[]);
            let buyers: std::collections::HashSet<_> = record
                .orders
                .iter()
                .filter(|o| o.side == Side::Buy)
                .map(|o| o.agent)
                .collect();
            let sellers: std::collections::HashSet<_> = record
                .orders
                .iter()
                .filter(|o| o.side == Side::Sell)
                .map(|o| o.agent)
                .collect();
            assert!(buyers.is_disjoint(&sellers));
        }
    }
}
