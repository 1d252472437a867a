//! Ground-truth maximum matching volume by explicit unit search.

use super::instances::SmallInstance;
use crate::market::{Qty, Side};

const HALF_KWH: i64 = 500_000_000;

/// Maximum matched volume of a [`SmallInstance`] at half-kWh granularity,
/// found by trying every candidate volume from the largest down.
///
/// For volume k (in units), the canonical selection takes the k highest
/// bid units and k lowest ask units; k is feasible iff the two selections
/// pair without any bid falling below its ask when both are sorted
/// ascending. Any feasible pairing of any k units can be exchanged into
/// the canonical one, so this search is exhaustive over volumes.
pub fn mvm_volume_bruteforce(instance: &SmallInstance) -> Qty {
    let mut bid_units: Vec<i64> = Vec::new();
    let mut ask_units: Vec<i64> = Vec::new();
    for order in &instance.orders {
        debug_assert!(
            order.quantity.units() % HALF_KWH == 0,
            "small instances sit on the half-kWh grid"
        );
        let units = order.quantity.units() / HALF_KWH;
        let bucket = match order.side {
            Side::Buy => &mut bid_units,
            Side::Sell => &mut ask_units,
        };
        for _ in 0..units {
            bucket.push(order.price.units());
        }
    }
    // Bids descending: prefix k = the k highest bids. Asks ascending.
    bid_units.sort_unstable_by(|a, b| b.cmp(a));
    ask_units.sort_unstable();

    let max_k = bid_units.len().min(ask_units.len());
    for k in (1..=max_k).rev() {
        // k highest bids, re-sorted ascending, against the k lowest asks.
        let mut chosen_bids: Vec<i64> = bid_units[..k].to_vec();
        chosen_bids.sort_unstable();
        let feasible = chosen_bids
            .iter()
            .zip(&ask_units[..k])
            .all(|(bid, ask)| bid >= ask);
        if feasible {
            return Qty::from_units(k as i64 * HALF_KWH);
        }
    }
    Qty::ZERO
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{AgentId, Order, Price};

    fn order(agent: u32, side: Side, price: i64, qty: f64) -> Order {
        Order {
            agent: AgentId(agent),
            side,
            price: Price::from_cents_int(price),
            quantity: Qty::from_kwh(qty).unwrap(),
        }
    }

    #[test]
    fn worked_example_matches_four_kwh() {
        let instance = SmallInstance {
            orders: vec![
                order(0, Side::Buy, 9, 2.0),
                order(1, Side::Buy, 7, 2.0),
                order(2, Side::Sell, 5, 2.0),
                order(3, Side::Sell, 8, 2.0),
            ],
        };
        assert_eq!(mvm_volume_bruteforce(&instance).as_kwh(), 4.0);
    }

    #[test]
    fn no_feasible_pair_matches_zero() {
        let instance = SmallInstance {
            orders: vec![order(0, Side::Buy, 3, 2.0), order(1, Side::Sell, 9, 1.0)],
        };
        assert_eq!(mvm_volume_bruteforce(&instance), Qty::ZERO);
    }

    #[test]
    fn all_feasible_balanced_matches_everything() {
        let instance = SmallInstance {
            orders: vec![
                order(0, Side::Buy, 11, 2.5),
                order(1, Side::Buy, 11, 1.5),
                order(2, Side::Sell, 5, 3.0),
                order(3, Side::Sell, 5, 1.0),
            ],
        };
        assert_eq!(mvm_volume_bruteforce(&instance).as_kwh(), 4.0);
    }
}
