//! McAfee double auction: a hybrid of the k-double and Vickrey-variant
//! rules keyed on the first excluded bid and ask prices.

use super::outcome::{no_trade_outcome, uniform_outcome};
use super::stacks::{find_intersection, MarketStacks};
use super::vickrey::clear_vickrey_at;
use super::{ClearingOutcome, Mechanism};
use crate::market::{MarketConstants, Price};

/// Case A: when both first-excluded prices exist and their midpoint
/// P_0 = (pb_{L+1} + ps_{H+1}) / 2 lands inside [ps_H, pb_L], the book
/// clears like a k-double auction at the uniform price P_0 (first L buyers
/// and H sellers, long side prorated, auctioneer nets zero). Otherwise
/// Case B applies: the outcome is exactly the Vickrey-variant one. The
/// fallback keeps the mechanism strategy-proof when a marginal price is
/// missing.
pub fn clear_mcafee(stacks: &MarketStacks, _constants: &MarketConstants) -> ClearingOutcome {
    let x = find_intersection(stacks);
    if x.q_star.is_zero() {
        return no_trade_outcome(Mechanism::McAfee, stacks);
    }
    let pb = x.marginal_bid.expect("crossing book has a marginal bid");
    let ps = x.marginal_ask.expect("crossing book has a marginal ask");
    if let (Some(next_bid), Some(next_ask)) = (x.next_bid, x.next_ask) {
        let p0 = midpoint(next_bid, next_ask);
        if ps <= p0 && p0 <= pb {
            let mut out = uniform_outcome(
                Mechanism::McAfee,
                stacks,
                x.bid_levels,
                x.ask_levels,
                p0,
                p0,
            );
            out.mechanism = Mechanism::McAfee;
            return out;
        }
    }
    let mut out = clear_vickrey_at(stacks, &x);
    out.mechanism = Mechanism::McAfee;
    out
}

/// (a + b) / 2 on the price grid, rounding half a unit up. Exact for
/// whole-cent arm prices.
fn midpoint(a: Price, b: Price) -> Price {
    let sum = a.units() + b.units();
    Price::from_units(sum.div_euclid(2) + sum.rem_euclid(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clearing::{build_stacks, clear_vickrey_variant};
    use crate::market::{default_constants, AgentId, Order, Qty, Side};

    fn order(agent: u32, side: Side, price: i64, qty: f64) -> Order {
        Order {
            agent: AgentId(agent),
            side,
            price: Price::from_cents_int(price),
            quantity: Qty::from_kwh(qty).unwrap(),
        }
    }

    #[test]
    fn case_a_uses_the_excluded_price_midpoint() {
        let c = default_constants();
        let orders = vec![
            order(0, Side::Buy, 10, 2.0), // B1
            order(1, Side::Buy, 9, 3.0),  // B2
            order(2, Side::Buy, 6, 2.0),  // B3
            order(3, Side::Sell, 5, 2.0), // S1
            order(4, Side::Sell, 7, 4.0), // S2
            order(5, Side::Sell, 8, 3.0), // S3
        ];
        let out = clear_mcafee(&build_stacks(&orders), &c);
        // P_0 = (6 + 8) / 2 = 7, inside [ps_H, pb_L] = [7, 9].
        assert_eq!(out.buyer_price, Some(Price::from_cents_int(7)));
        assert_eq!(out.seller_price, Some(Price::from_cents_int(7)));
        assert_eq!(out.cleared_volume.as_kwh(), 5.0);
        // Buyers B1 and B2 fully cleared; sellers prorated by the 1 kWh
        // over-supply: S1 1.5, S2 3.5.
        assert_eq!(out.agent(AgentId(0)).unwrap().cleared().as_kwh(), 2.0);
        assert_eq!(out.agent(AgentId(1)).unwrap().cleared().as_kwh(), 3.0);
        assert_eq!(out.agent(AgentId(2)).unwrap().cleared().as_kwh(), 0.0);
        assert_eq!(out.agent(AgentId(3)).unwrap().cleared().as_kwh(), 1.5);
        assert_eq!(out.agent(AgentId(4)).unwrap().cleared().as_kwh(), 3.5);
        assert_eq!(out.agent(AgentId(5)).unwrap().cleared().as_kwh(), 0.0);
        assert_eq!(out.auctioneer_surplus.units(), 0);
        assert_eq!(out.net_auctioneer_payment().units(), 0);
    }

    #[test]
    fn case_a_condition_only_depends_on_the_excluded_prices() {
        let c = default_constants();
        // Same cleared levels, but the first excluded bid is 2 and the
        // first excluded ask 12: P_0 = 7 still lands in [7, 9].
        let orders = vec![
            order(0, Side::Buy, 10, 2.0),
            order(1, Side::Buy, 9, 3.0),
            order(2, Side::Buy, 2, 2.0),
            order(3, Side::Sell, 5, 2.0),
            order(4, Side::Sell, 7, 4.0),
            order(5, Side::Sell, 12, 3.0),
        ];
        let out = clear_mcafee(&build_stacks(&orders), &c);
        assert_eq!(out.buyer_price, Some(Price::from_cents_int(7)));
        assert_eq!(out.auctioneer_surplus.units(), 0);
    }

    #[test]
    fn missing_excluded_bid_falls_back_to_the_vickrey_outcome() {
        let c = default_constants();
        // All bids cleared: no pb_{L+1} exists.
        let orders = vec![
            order(0, Side::Buy, 10, 2.0),
            order(1, Side::Buy, 9, 3.0),
            order(2, Side::Sell, 5, 2.0),
            order(3, Side::Sell, 7, 4.0),
        ];
        let stacks = build_stacks(&orders);
        let mcafee = clear_mcafee(&stacks, &c);
        let vickrey = clear_vickrey_variant(&stacks, &c);
        assert_eq!(mcafee.agents, vickrey.agents);
        assert_eq!(mcafee.cleared_volume, vickrey.cleared_volume);
        assert_eq!(mcafee.auctioneer_surplus, vickrey.auctioneer_surplus);
        assert_eq!(mcafee.mechanism, Mechanism::McAfee);
    }

    #[test]
    fn midpoint_outside_band_falls_back_to_case_b() {
        let c = default_constants();
        // L = H = 2 with next_bid = 3 and next_ask = 10: P_0 = 6.5 lies
        // below ps_H = 9, so the Vickrey rules apply and trade happens.
        let orders = vec![
            order(0, Side::Buy, 11, 2.0),
            order(1, Side::Buy, 10, 2.0),
            order(2, Side::Buy, 3, 1.0),
            order(3, Side::Sell, 8, 2.0),
            order(4, Side::Sell, 9, 2.0),
            order(5, Side::Sell, 10, 1.0),
        ];
        let stacks = build_stacks(&orders);
        let out = clear_mcafee(&stacks, &c);
        let vickrey = clear_vickrey_variant(&stacks, &c);
        assert_eq!(out.cleared_volume.as_kwh(), 2.0);
        assert_eq!(out.agents, vickrey.agents);
        assert_eq!(out.auctioneer_surplus, vickrey.auctioneer_surplus);
        assert!(out.auctioneer_surplus.as_cents() > 0.0);
    }
}
