//! Maximum volume matching: a pay-as-bid mechanism that maximizes traded
//! volume instead of clearing at the curve intersection.

use super::outcome::{no_trade_outcome, AgentFills, Fill, MatchedPair};
use super::prorate::prorate_uniform;
use super::stacks::{MarketStacks, PriceLevel};
use super::{ClearingOutcome, Mechanism};
use crate::market::{AgentId, MarketConstants, Money, Price, Qty};

/// Clears the maximum volume V such that pairing the V highest bid units
/// against the V lowest ask units in ascending price order keeps every
/// pair's bid at or above its ask. Matched buyers pay their own bid and
/// sellers receive their own ask.
pub fn clear_mvm(stacks: &MarketStacks, _constants: &MarketConstants) -> ClearingOutcome {
    let volume = max_matchable_volume(stacks);
    if volume.is_zero() {
        return no_trade_outcome(Mechanism::Mvm, stacks);
    }

    // Per-agent cleared quantities: the top `volume` of the demand curve
    // and the bottom `volume` of the supply curve, with the marginal level
    // prorated uniformly over its contributors.
    let cleared_bids = take_prefix(&stacks.demand, volume);
    let cleared_asks = take_prefix(&stacks.supply, volume);

    // Ascending price order: cleared asks already ascend; cleared bids are
    // reversed so the lowest cleared bid pairs with the lowest ask.
    let bids_ascending: Vec<(AgentId, Price, Qty)> =
        cleared_bids.iter().rev().flat_map(level_entries).collect();
    let asks_ascending: Vec<(AgentId, Price, Qty)> =
        cleared_asks.iter().flat_map(level_entries).collect();

    let pairs = match_ascending(&bids_ascending, &asks_ascending);

    let mut agents = Vec::new();
    super::outcome::collect_agents_for(stacks, &mut agents);
    let mut auctioneer_surplus = Money::ZERO;
    for pair in &pairs {
        auctioneer_surplus += (pair.bid_price - pair.ask_price).times(pair.quantity);
        record_fill(&mut agents, pair.buyer, pair.bid_price, pair.quantity);
        record_fill(&mut agents, pair.seller, pair.ask_price, pair.quantity);
    }

    ClearingOutcome {
        mechanism: Mechanism::Mvm,
        agents,
        pairs,
        cleared_volume: volume,
        buyer_price: None,
        seller_price: None,
        auctioneer_surplus,
    }
}

/// Maximum feasible matching volume, computed on the merged breakpoint
/// grid of the two step curves.
///
/// Matching volume V is feasible iff no supply level j with price above a
/// demand level i's price gets paired into it, which bounds V by
/// dc_{i-1} + sc_{j-1} (cumulative quantities below the two levels) for
/// every such infeasible pair. Feasibility is monotone in V, so the answer
/// is the minimum bound, capped by the two curve totals. The two-pointer
/// scan below visits each level once.
pub(crate) fn max_matchable_volume(stacks: &MarketStacks) -> Qty {
    let demand = &stacks.demand;
    let supply = &stacks.supply;
    let mut best = stacks.total_demand().min(stacks.total_supply());
    if best.is_zero() {
        return Qty::ZERO;
    }
    // First demand level whose price is below the current ask price; demand
    // prices descend, so the pointer only moves left as ask prices ascend.
    let mut i_min = demand.len();
    for (j, ask_level) in supply.iter().enumerate() {
        while i_min > 0 && demand[i_min - 1].price < ask_level.price {
            i_min -= 1;
        }
        if i_min < demand.len() {
            let below_demand = if i_min == 0 {
                Qty::ZERO
            } else {
                demand[i_min - 1].cumulative
            };
            let below_supply = if j == 0 {
                Qty::ZERO
            } else {
                supply[j - 1].cumulative
            };
            best = best.min(below_demand + below_supply);
        }
    }
    best
}

/// The first `volume` of a curve as levels with per-agent quantities; the
/// marginal level's overhang is prorated uniformly over its contributors.
fn take_prefix(levels: &[PriceLevel], volume: Qty) -> Vec<(Price, Vec<(AgentId, Qty)>)> {
    let mut out = Vec::new();
    let mut previous_cum = Qty::ZERO;
    for level in levels {
        if previous_cum >= volume {
            break;
        }
        let want = (volume - previous_cum).min(level.quantity);
        let mut entries: Vec<(AgentId, Qty)> = level
            .entries
            .iter()
            .map(|e| (e.agent, e.quantity))
            .collect();
        entries.sort_by_key(|(agent, _)| *agent);
        if want < level.quantity {
            let mut quantities: Vec<Qty> = entries.iter().map(|(_, q)| *q).collect();
            prorate_uniform(&mut quantities, level.quantity - want)
                .expect("level quantity covers its own overhang");
            for ((_, q), adjusted) in entries.iter_mut().zip(quantities) {
                *q = adjusted;
            }
        }
        out.push((level.price, entries));
        previous_cum = level.cumulative;
    }
    out
}

fn level_entries(
    (price, entries): &(Price, Vec<(AgentId, Qty)>),
) -> impl Iterator<Item = (AgentId, Price, Qty)> + '_ {
    let price = *price;
    entries
        .iter()
        .filter(|(_, q)| !q.is_zero())
        .map(move |(agent, q)| (*agent, price, *q))
}

/// Pairs two equal-volume ascending lists, splitting on the shorter
/// remaining quantity.
fn match_ascending(
    bids: &[(AgentId, Price, Qty)],
    asks: &[(AgentId, Price, Qty)],
) -> Vec<MatchedPair> {
    let mut pairs = Vec::new();
    let (mut bi, mut ai) = (0usize, 0usize);
    let mut bid_left = bids.first().map_or(Qty::ZERO, |b| b.2);
    let mut ask_left = asks.first().map_or(Qty::ZERO, |a| a.2);
    while bi < bids.len() && ai < asks.len() {
        let quantity = bid_left.min(ask_left);
        let (buyer, bid_price, _) = bids[bi];
        let (seller, ask_price, _) = asks[ai];
        debug_assert!(
            bid_price >= ask_price,
            "volume choice guarantees pair feasibility"
        );
        if !quantity.is_zero() {
            pairs.push(MatchedPair {
                buyer,
                seller,
                quantity,
                bid_price,
                ask_price,
            });
        }
        bid_left = bid_left - quantity;
        ask_left = ask_left - quantity;
        if bid_left.is_zero() {
            bi += 1;
            bid_left = bids.get(bi).map_or(Qty::ZERO, |b| b.2);
        }
        if ask_left.is_zero() {
            ai += 1;
            ask_left = asks.get(ai).map_or(Qty::ZERO, |a| a.2);
        }
    }
    pairs
}

fn record_fill(agents: &mut [AgentFills], agent: AgentId, price: Price, quantity: Qty) {
    let idx = agents
        .binary_search_by_key(&agent, |a| a.agent)
        .expect("matched agent present in book");
    let entry = &mut agents[idx];
    // Merge consecutive fills at the same price (an agent always pays or
    // receives its own order price here).
    if let Some(last) = entry.fills.last_mut() {
        if last.price == price {
            last.quantity += quantity;
            entry.uncleared = entry.uncleared - quantity;
            return;
        }
    }
    entry.fills.push(Fill { quantity, price });
    entry.uncleared = entry.uncleared - quantity;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clearing::{build_stacks, find_intersection};
    use crate::market::{default_constants, Order, Side};

    fn order(agent: u32, side: Side, price: i64, qty: f64) -> Order {
        Order {
            agent: AgentId(agent),
            side,
            price: Price::from_cents_int(price),
            quantity: Qty::from_kwh(qty).unwrap(),
        }
    }

    #[test]
    fn worked_example_beats_the_intersection_volume() {
        let c = default_constants();
        let orders = vec![
            order(0, Side::Buy, 9, 2.0),  // B1
            order(1, Side::Buy, 7, 2.0),  // B2
            order(2, Side::Sell, 5, 2.0), // S1
            order(3, Side::Sell, 8, 2.0), // S2
        ];
        let stacks = build_stacks(&orders);
        assert_eq!(find_intersection(&stacks).q_star.as_kwh(), 2.0);
        let out = clear_mvm(&stacks, &c);
        assert_eq!(out.cleared_volume.as_kwh(), 4.0);
        // Ascending matching: B2 <-> S1 at (7, 5); B1 <-> S2 at (9, 8).
        assert_eq!(out.pairs.len(), 2);
        assert_eq!(out.pairs[0].buyer, AgentId(1));
        assert_eq!(out.pairs[0].seller, AgentId(2));
        assert_eq!(out.pairs[0].bid_price, Price::from_cents_int(7));
        assert_eq!(out.pairs[0].ask_price, Price::from_cents_int(5));
        assert_eq!(out.pairs[1].buyer, AgentId(0));
        assert_eq!(out.pairs[1].seller, AgentId(3));
        // Surplus: (14 - 10) + (18 - 16) = 6 cents.
        assert_eq!(out.auctioneer_surplus.as_cents(), 6.0);
        assert_eq!(out.net_auctioneer_payment(), out.auctioneer_surplus);
    }

    #[test]
    fn infeasible_book_trades_nothing() {
        let c = default_constants();
        let orders = vec![order(0, Side::Buy, 4, 2.0), order(1, Side::Sell, 8, 2.0)];
        let out = clear_mvm(&build_stacks(&orders), &c);
        assert_eq!(out.cleared_volume, Qty::ZERO);
        assert!(out.pairs.is_empty());
    }

    #[test]
    fn all_feasible_book_clears_everything() {
        let c = default_constants();
        let orders = vec![
            order(0, Side::Buy, 11, 2.0),
            order(1, Side::Buy, 11, 1.0),
            order(2, Side::Sell, 5, 1.5),
            order(3, Side::Sell, 5, 1.5),
        ];
        let out = clear_mvm(&build_stacks(&orders), &c);
        assert_eq!(out.cleared_volume.as_kwh(), 3.0);
        for pair in &out.pairs {
            assert_eq!(pair.bid_price, Price::from_cents_int(11));
            assert_eq!(pair.ask_price, Price::from_cents_int(5));
        }
        let total: Qty = out.pairs.iter().map(|p| p.quantity).sum();
        assert_eq!(total.as_kwh(), 3.0);
    }

    #[test]
    fn marginal_level_is_prorated_within_contributors() {
        let c = default_constants();
        // Only 1 kWh of supply: the single 2-agent bid level at 10 is
        // split 0.5 / 0.5.
        let orders = vec![
            order(0, Side::Buy, 10, 1.0),
            order(1, Side::Buy, 10, 1.0),
            order(2, Side::Sell, 5, 1.0),
        ];
        let out = clear_mvm(&build_stacks(&orders), &c);
        assert_eq!(out.cleared_volume.as_kwh(), 1.0);
        assert_eq!(out.agent(AgentId(0)).unwrap().cleared().as_kwh(), 0.5);
        assert_eq!(out.agent(AgentId(1)).unwrap().cleared().as_kwh(), 0.5);
    }
}
