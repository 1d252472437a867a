//! Property tests for the clearing mechanisms: volume balance, the
//! conservation identity, budget-balance classes, pair feasibility, the
//! volume ordering, and determinism, over arbitrary books (including
//! off-grid prices).

use proptest::prelude::*;
use wattmarket_core::clearing::{
    agent_surplus, build_stacks, clear_k_double, clear_mvm, clear_vickrey_variant,
    find_intersection, Mechanism,
};
use wattmarket_core::market::{default_constants, AgentId, Money, Order, Price, Qty, Side};

fn arb_book() -> impl Strategy<Value = Vec<Order>> {
    let order = |side: Side, base: u32| {
        // Prices in tenths of a cent up to 15.0c (off the arm grid too);
        // quantities up to 4 kWh in nano-kWh.
        (0i64..=150, 1i64..=4_000_000_000).prop_map(move |(price_units, qty_units)| Order {
            agent: AgentId(base),
            side,
            price: Price::from_units(price_units),
            quantity: Qty::from_units(qty_units),
        })
    };
    let buyers = prop::collection::vec(order(Side::Buy, 0), 0..8);
    let sellers = prop::collection::vec(order(Side::Sell, 0), 0..8);
    (buyers, sellers).prop_map(|(mut buyers, sellers)| {
        let n = buyers.len() as u32;
        for (i, o) in buyers.iter_mut().enumerate() {
            o.agent = AgentId(i as u32);
        }
        let mut book = buyers;
        for (i, mut o) in sellers.into_iter().enumerate() {
            o.agent = AgentId(n + i as u32);
            book.push(o);
        }
        book
    })
}

proptest! {
    /// Cleared buy volume equals cleared sell volume, exactly.
    #[test]
    fn volume_balance_is_exact(book in arb_book()) {
        let c = default_constants();
        let stacks = build_stacks(&book);
        for mechanism in Mechanism::ALL {
            let out = mechanism.clear(&stacks, &c);
            prop_assert_eq!(out.cleared_buy_volume(), out.cleared_sell_volume());
            prop_assert_eq!(out.cleared_buy_volume(), out.cleared_volume);
        }
    }

    /// S_hat + S_au = P_UR*Q_c + P_FIT*(Q_s - Q_c), exact in fixed-point
    /// money, for every mechanism.
    #[test]
    fn conservation_identity_is_exact(book in arb_book()) {
        let c = default_constants();
        let stacks = build_stacks(&book);
        for mechanism in Mechanism::ALL {
            let out = mechanism.clear(&stacks, &c);
            let s = agent_surplus(&out, &c);
            let rhs = c.p_ur.times(out.cleared_volume)
                + c.p_fit.times(out.total_supply() - out.cleared_volume);
            prop_assert_eq!(s.total() + out.auctioneer_surplus, rhs);
        }
    }

    /// k-double nets exactly zero; the other three never net a loss. The
    /// structural surplus agrees with payments recomputed from fills.
    #[test]
    fn budget_balance_classes_hold(book in arb_book()) {
        let c = default_constants();
        let stacks = build_stacks(&book);
        for mechanism in Mechanism::ALL {
            let out = mechanism.clear(&stacks, &c);
            let net = out.net_auctioneer_payment();
            prop_assert_eq!(net, out.auctioneer_surplus);
            match mechanism {
                Mechanism::KDouble => prop_assert_eq!(net, Money::ZERO),
                _ => prop_assert!(net >= Money::ZERO),
            }
        }
    }

    /// Every matched pair pays at least what its seller asks.
    #[test]
    fn mvm_pairs_are_feasible(book in arb_book()) {
        let c = default_constants();
        let out = clear_mvm(&build_stacks(&book), &c);
        for pair in &out.pairs {
            prop_assert!(pair.bid_price >= pair.ask_price);
            prop_assert!(!pair.quantity.is_zero());
        }
        let paired: Qty = out.pairs.iter().map(|p| p.quantity).sum();
        prop_assert_eq!(paired, out.cleared_volume);
    }

    /// Q^V <= Q* <= Q^MVM on any fixed book.
    #[test]
    fn volume_ordering_holds(book in arb_book()) {
        let c = default_constants();
        let stacks = build_stacks(&book);
        let q_star = find_intersection(&stacks).q_star;
        let q_vickrey = clear_vickrey_variant(&stacks, &c).cleared_volume;
        let q_mvm = clear_mvm(&stacks, &c).cleared_volume;
        prop_assert!(q_vickrey <= q_star);
        prop_assert!(q_star <= q_mvm);
    }

    /// Identical inputs produce identical outcomes, byte for byte.
    #[test]
    fn clearing_is_deterministic(book in arb_book()) {
        let c = default_constants();
        for mechanism in Mechanism::ALL {
            let a = mechanism.clear(&build_stacks(&book), &c);
            let b = mechanism.clear(&build_stacks(&book), &c);
            prop_assert_eq!(a, b);
        }
    }

    /// Per-agent accounting: cleared + uncleared = submitted, fills are
    /// non-negative, and the k-double clears exactly the intersection
    /// volume.
    #[test]
    fn per_agent_accounting_balances(book in arb_book()) {
        let c = default_constants();
        let stacks = build_stacks(&book);
        for mechanism in Mechanism::ALL {
            let out = mechanism.clear(&stacks, &c);
            prop_assert_eq!(out.agents.len(), book.len());
            for a in &out.agents {
                prop_assert_eq!(a.cleared() + a.uncleared, a.submitted);
                prop_assert!(a.fills.iter().all(|f| f.quantity.units() > 0));
            }
        }
        let q_star = find_intersection(&stacks).q_star;
        prop_assert_eq!(clear_k_double(&stacks, &c).cleared_volume, q_star);
    }

    /// McAfee either prices both sides at one in-band P_0 with zero
    /// surplus, or reproduces the Vickrey outcome.
    #[test]
    fn mcafee_is_a_faithful_hybrid(book in arb_book()) {
        let c = default_constants();
        let stacks = build_stacks(&book);
        let x = find_intersection(&stacks);
        let mcafee = wattmarket_core::clearing::clear_mcafee(&stacks, &c);
        if mcafee.buyer_price.is_some() && mcafee.buyer_price == mcafee.seller_price {
            // Case A: the uniform price lies within [ps_H, pb_L].
            let p0 = mcafee.buyer_price.unwrap();
            prop_assert!(p0 >= x.marginal_ask.unwrap());
            prop_assert!(p0 <= x.marginal_bid.unwrap());
            prop_assert_eq!(mcafee.auctioneer_surplus, Money::ZERO);
        } else {
            let vickrey = clear_vickrey_variant(&stacks, &c);
            prop_assert_eq!(mcafee.agents, vickrey.agents);
            prop_assert_eq!(mcafee.cleared_volume, vickrey.cleared_volume);
        }
    }
}
