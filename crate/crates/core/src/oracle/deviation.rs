//! Strategy-proofness deviation tests: does any single price arm beat
//! bidding one's reservation price when everyone else is truthful?

use super::dump_orders;
use crate::clearing::{build_stacks, ClearingOutcome, Mechanism};
use crate::market::{AgentId, MarketConstants, Money, Order, Qty, Side};
use serde::Serialize;

/// Roles and truthful quantities of a deviation-test instance; prices are
/// assigned by the test (reservation for everyone but the deviator).
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationInstance {
    pub participants: Vec<(AgentId, Side, Qty)>,
}

impl DeviationInstance {
    pub fn total(&self, side: Side) -> Qty {
        self.participants
            .iter()
            .filter(|(_, s, _)| *s == side)
            .map(|(_, _, q)| *q)
            .sum()
    }
}

/// Outcome of enumerating one deviator's price arms.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub mechanism: Mechanism,
    pub deviator: u32,
    pub deviator_side: &'static str,
    pub truthful_utility_cents: f64,
    pub best_deviation_utility_cents: f64,
    pub best_gain_cents: f64,
    /// Arm achieving the best utility.
    pub witness_arm: usize,
    pub instance: Vec<super::OrderDump>,
    #[serde(skip)]
    pub truthful_utility: Money,
    #[serde(skip)]
    /// Utility at every arm, indexed like `arm_prices`.
    pub arm_utilities: Vec<Money>,
}

impl DeviationReport {
    pub fn best_gain(&self) -> Money {
        let best = self
            .arm_utilities
            .iter()
            .max()
            .copied()
            .unwrap_or(Money::ZERO);
        best - self.truthful_utility
    }

    /// Arms whose utility strictly beats truthful bidding.
    pub fn strict_gain_arms(&self) -> Vec<usize> {
        self.arm_utilities
            .iter()
            .enumerate()
            .filter(|(_, u)| **u > self.truthful_utility)
            .map(|(m, _)| m)
            .collect()
    }
}

/// Utility of one agent in a clearing outcome, per the single-round
/// definition: payoff above the agent's worst case. Buyers earn
/// (P_UR - p) per cleared kWh, sellers (p - P_FIT); utility-routed
/// residuals contribute nothing. Exact money.
pub fn agent_utility(
    outcome: &ClearingOutcome,
    agent: AgentId,
    constants: &MarketConstants,
) -> Money {
    let Some(fills) = outcome.agent(agent) else {
        return Money::ZERO;
    };
    let mut utility = Money::ZERO;
    for f in &fills.fills {
        match fills.side {
            Side::Buy => utility += (constants.p_ur - f.price).times(f.quantity),
            Side::Sell => utility += (f.price - constants.p_fit).times(f.quantity),
        }
    }
    utility
}

/// Builds the truthful book: buyers bid P_UR, sellers ask P_FIT.
fn truthful_book(instance: &DeviationInstance, constants: &MarketConstants) -> Vec<Order> {
    instance
        .participants
        .iter()
        .map(|(agent, side, quantity)| Order {
            agent: *agent,
            side: *side,
            price: match side {
                Side::Buy => constants.p_ur,
                Side::Sell => constants.p_fit,
            },
            quantity: *quantity,
        })
        .collect()
}

/// Enumerates all price-arm deviations for `deviator` with every other
/// agent truthful at its reservation price; quantities are truthful
/// throughout.
pub fn deviation_test(
    mechanism: Mechanism,
    instance: &DeviationInstance,
    deviator: AgentId,
    constants: &MarketConstants,
) -> DeviationReport {
    let mut book = truthful_book(instance, constants);
    let deviator_idx = book
        .iter()
        .position(|o| o.agent == deviator)
        .expect("deviator participates in the instance");
    let deviator_side = book[deviator_idx].side;

    let truthful_outcome = mechanism.clear(&build_stacks(&book), constants);
    let truthful_utility = agent_utility(&truthful_outcome, deviator, constants);

    let mut arm_utilities = Vec::with_capacity(constants.arm_count());
    for arm in 0..constants.arm_count() {
        book[deviator_idx].price = constants.price_of_arm(arm);
        let outcome = mechanism.clear(&build_stacks(&book), constants);
        arm_utilities.push(agent_utility(&outcome, deviator, constants));
    }
    book[deviator_idx].price = match deviator_side {
        Side::Buy => constants.p_ur,
        Side::Sell => constants.p_fit,
    };

    let (witness_arm, best) = arm_utilities
        .iter()
        .enumerate()
        .max_by_key(|(_, u)| **u)
        .map(|(m, u)| (m, *u))
        .expect("at least two arms");
    DeviationReport {
        mechanism,
        deviator: deviator.0,
        deviator_side: match deviator_side {
            Side::Buy => "buy",
            Side::Sell => "sell",
        },
        truthful_utility_cents: truthful_utility.as_cents(),
        best_deviation_utility_cents: best.as_cents(),
        best_gain_cents: (best - truthful_utility).as_cents(),
        witness_arm,
        instance: dump_orders(&book),
        truthful_utility,
        arm_utilities,
    }
}
