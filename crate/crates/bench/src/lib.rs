//! Shared input builders for the benchmark targets.

use rand::Rng;
use wattmarket_core::engine::{substream, StreamKind};
use wattmarket_core::market::{AgentId, MarketConstants, Order, Qty, Side};

/// A synthetic order book shaped like a converged market round: buyers
/// massed in the top third of the arm grid, sellers in the bottom third,
/// both with exploration noise across all arms.
pub fn synthetic_book(n_per_side: u32, seed: u64, constants: &MarketConstants) -> Vec<Order> {
    let mut rng = substream(seed, StreamKind::OracleInstance, 1, 0, 0);
    let arms = constants.arm_count();
    let mut orders = Vec::with_capacity(2 * n_per_side as usize);
    for i in 0..n_per_side {
        orders.push(Order {
            agent: AgentId(i),
            side: Side::Buy,
            price: constants.price_of_arm(biased_arm(rng.random(), arms, true)),
            quantity: Qty::from_kwh(1.0 + 2.0 * rng.random::<f64>()).unwrap(),
        });
    }
    for i in 0..n_per_side {
        orders.push(Order {
            agent: AgentId(n_per_side + i),
            side: Side::Sell,
            price: constants.price_of_arm(biased_arm(rng.random(), arms, false)),
            quantity: Qty::from_kwh(1.0 + 2.0 * rng.random::<f64>()).unwrap(),
        });
    }
    orders
}

fn biased_arm(u: f64, arms: usize, high: bool) -> usize {
    let third = (arms / 3).max(1);
    if u < 0.8 {
        let offset = (((u / 0.8) * third as f64) as usize).min(third - 1);
        if high {
            arms - 1 - offset
        } else {
            offset
        }
    } else {
        ((((u - 0.8) / 0.2) * arms as f64) as usize).min(arms - 1)
    }
}
