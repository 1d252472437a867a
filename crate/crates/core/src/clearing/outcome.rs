//! Per-agent clearing results shared by all four mechanisms.

use super::prorate::prorate_uniform;
use super::stacks::MarketStacks;
use super::Mechanism;
use crate::market::{AgentId, Money, Price, Qty, Side};
use serde::{Deserialize, Serialize};

/// One cleared slice of an agent's order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub quantity: Qty,
    pub price: Price,
}

/// Clearing result for a single submitted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentFills {
    pub agent: AgentId,
    pub side: Side,
    pub submitted: Qty,
    pub fills: Vec<Fill>,
    /// Residual routed to the utility (bought at P_UR, sold at P_FIT).
    pub uncleared: Qty,
}

impl AgentFills {
    pub fn cleared(&self) -> Qty {
        self.fills.iter().map(|f| f.quantity).sum()
    }
}

/// A buyer-seller match in the maximum-volume mechanism. The bid price is
/// never below the ask price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub buyer: AgentId,
    pub seller: AgentId,
    pub quantity: Qty,
    pub bid_price: Price,
    pub ask_price: Price,
}

/// Outcome of clearing one order book.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClearingOutcome {
    pub mechanism: Mechanism,
    /// One entry per submitted order, sorted by agent id.
    pub agents: Vec<AgentFills>,
    /// Buyer-seller matches; populated by the pay-as-bid mechanism only.
    pub pairs: Vec<MatchedPair>,
    pub cleared_volume: Qty,
    /// Uniform buyer price when the mechanism has one.
    pub buyer_price: Option<Price>,
    /// Uniform seller price when the mechanism has one.
    pub seller_price: Option<Price>,
    pub auctioneer_surplus: Money,
}

impl ClearingOutcome {
    pub fn agent(&self, id: AgentId) -> Option<&AgentFills> {
        self.agents
            .binary_search_by_key(&id, |a| a.agent)
            .ok()
            .map(|i| &self.agents[i])
    }

    pub fn cleared_buy_volume(&self) -> Qty {
        self.side_volume(Side::Buy)
    }

    pub fn cleared_sell_volume(&self) -> Qty {
        self.side_volume(Side::Sell)
    }

    fn side_volume(&self, side: Side) -> Qty {
        self.agents
            .iter()
            .filter(|a| a.side == side)
            .map(|a| a.cleared())
            .sum()
    }

    pub fn total_supply(&self) -> Qty {
        self.agents
            .iter()
            .filter(|a| a.side == Side::Sell)
            .map(|a| a.submitted)
            .sum()
    }

    pub fn uncleared_supply(&self) -> Qty {
        self.agents
            .iter()
            .filter(|a| a.side == Side::Sell)
            .map(|a| a.uncleared)
            .sum()
    }

    /// Net payment to the auctioneer recomputed from per-agent fills:
    /// what buyers pay minus what sellers receive. Exact.
    pub fn net_auctioneer_payment(&self) -> Money {
        let mut net = Money::ZERO;
        for a in &self.agents {
            for f in &a.fills {
                match a.side {
                    Side::Buy => net += f.price.times(f.quantity),
                    Side::Sell => net += -f.price.times(f.quantity),
                }
            }
        }
        net
    }

    /// Volume-weighted average fill price on one side, `None` when nothing
    /// cleared there.
    pub fn volume_weighted_price(&self, side: Side) -> Option<f64> {
        let mut value = Money::ZERO;
        let mut volume = Qty::ZERO;
        for a in self.agents.iter().filter(|a| a.side == side) {
            for f in &a.fills {
                value += f.price.times(f.quantity);
                volume += f.quantity;
            }
        }
        if volume.is_zero() {
            None
        } else {
            Some(value.as_cents() / volume.as_kwh())
        }
    }
}

/// Every order fully routed to the utility; used when the curves do not
/// cross or a mechanism clears nothing.
pub(super) fn no_trade_outcome(mechanism: Mechanism, stacks: &MarketStacks) -> ClearingOutcome {
    let mut agents = Vec::new();
    collect_agents_for(stacks, &mut agents);
    ClearingOutcome {
        mechanism,
        agents,
        pairs: Vec::new(),
        cleared_volume: Qty::ZERO,
        buyer_price: None,
        seller_price: None,
        auctioneer_surplus: Money::ZERO,
    }
}

pub(super) fn collect_agents_for(stacks: &MarketStacks, out: &mut Vec<AgentFills>) {
    for (levels, side) in [(&stacks.demand, Side::Buy), (&stacks.supply, Side::Sell)] {
        for level in levels.iter() {
            for e in &level.entries {
                out.push(AgentFills {
                    agent: e.agent,
                    side,
                    submitted: e.quantity,
                    fills: Vec::new(),
                    uncleared: e.quantity,
                });
            }
        }
    }
    out.sort_by_key(|a| a.agent);
    debug_assert!(
        out.windows(2).all(|w| w[0].agent < w[1].agent),
        "one order per agent per round"
    );
}

/// Shared clearing body for the uniform-price mechanisms: clears the first
/// `bid_levels` demand levels against the first `ask_levels` supply levels,
/// prorating the long side, and settles buyers at `buyer_price` and sellers
/// at `seller_price`.
pub(super) fn uniform_outcome(
    mechanism: Mechanism,
    stacks: &MarketStacks,
    bid_levels: usize,
    ask_levels: usize,
    buyer_price: Price,
    seller_price: Price,
) -> ClearingOutcome {
    if bid_levels == 0 || ask_levels == 0 {
        return no_trade_outcome(mechanism, stacks);
    }
    let cleared_bids = stacks.demand[bid_levels - 1].cumulative;
    let cleared_asks = stacks.supply[ask_levels - 1].cumulative;
    let cleared_volume = cleared_bids.min(cleared_asks);

    // Cleared participants in agent-id order; the long side is prorated.
    let mut buyers = cleared_entries(&stacks.demand[..bid_levels]);
    let mut sellers = cleared_entries(&stacks.supply[..ask_levels]);
    if cleared_bids > cleared_asks {
        prorate_entries(&mut buyers, cleared_bids - cleared_asks);
    } else if cleared_asks > cleared_bids {
        prorate_entries(&mut sellers, cleared_asks - cleared_bids);
    }

    let mut agents = Vec::new();
    collect_agents_for(stacks, &mut agents);
    apply_uniform_fills(&mut agents, &buyers, buyer_price);
    apply_uniform_fills(&mut agents, &sellers, seller_price);

    let auctioneer_surplus = (buyer_price - seller_price).times(cleared_volume);
    ClearingOutcome {
        mechanism,
        agents,
        pairs: Vec::new(),
        cleared_volume,
        buyer_price: Some(buyer_price),
        seller_price: Some(seller_price),
        auctioneer_surplus,
    }
}

/// (agent, cleared quantity) pairs for the given levels, agent-id ascending.
fn cleared_entries(levels: &[super::stacks::PriceLevel]) -> Vec<(AgentId, Qty)> {
    let mut entries: Vec<(AgentId, Qty)> = levels
        .iter()
        .flat_map(|l| l.entries.iter().map(|e| (e.agent, e.quantity)))
        .collect();
    entries.sort_by_key(|(agent, _)| *agent);
    entries
}

fn prorate_entries(entries: &mut [(AgentId, Qty)], excess: Qty) {
    let mut quantities: Vec<Qty> = entries.iter().map(|(_, q)| *q).collect();
    prorate_uniform(&mut quantities, excess).expect("cleared long side always covers the excess");
    for ((_, q), adjusted) in entries.iter_mut().zip(quantities) {
        *q = adjusted;
    }
}

fn apply_uniform_fills(agents: &mut [AgentFills], cleared: &[(AgentId, Qty)], price: Price) {
    for (agent, quantity) in cleared {
        if quantity.is_zero() {
            continue;
        }
        let idx = agents
            .binary_search_by_key(agent, |a| a.agent)
            .expect("cleared agent present in book");
        let entry = &mut agents[idx];
        entry.fills.push(Fill {
            quantity: *quantity,
            price,
        });
        entry.uncleared = entry.uncleared - *quantity;
    }
}
