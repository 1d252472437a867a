//! Seeded generators for small test instances. These use their own stream
//! namespace so oracle sweeps reproduce independently of experiments.

use crate::engine::{substream, StreamKind};
use crate::market::{AgentId, MarketConstants, Order, Price, Qty, Side};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A book of at most 8 orders with quantities on a coarse half-kWh grid
/// (up to 4 kWh) and prices on the arm grid, small enough for exhaustive
/// deviation enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallInstance {
    pub orders: Vec<Order>,
}

pub(crate) fn oracle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    substream(seed, StreamKind::OracleInstance, 0, index, 0)
}

fn grid_qty<R: Rng>(rng: &mut R) -> Qty {
    // Multiples of 0.5 kWh in [0.5, 4.0].
    Qty::from_units(500_000_000 * rng.random_range(1..=8))
}

fn arm_price<R: Rng>(rng: &mut R, constants: &MarketConstants) -> Price {
    constants.arm_prices[rng.random_range(0..constants.arm_count())]
}

/// Draws a [`SmallInstance`]: 1..=4 buyers and 1..=4 sellers on the coarse
/// grids.
pub fn random_small_instance<R: Rng>(rng: &mut R, constants: &MarketConstants) -> SmallInstance {
    let n_buyers = rng.random_range(1..=4u32);
    let n_sellers = rng.random_range(1..=4u32);
    let mut orders = Vec::new();
    for i in 0..n_buyers {
        orders.push(Order {
            agent: AgentId(i),
            side: Side::Buy,
            price: arm_price(rng, constants),
            quantity: grid_qty(rng),
        });
    }
    for i in 0..n_sellers {
        orders.push(Order {
            agent: AgentId(n_buyers + i),
            side: Side::Sell,
            price: arm_price(rng, constants),
            quantity: grid_qty(rng),
        });
    }
    SmallInstance { orders }
}

/// Draws a random order book for property sweeps: up to 8 orders per side,
/// arm-grid prices, and a mix of half-grid and continuous quantities so
/// proration paths with indivisible remainders get exercised.
pub fn random_book<R: Rng>(rng: &mut R, constants: &MarketConstants) -> Vec<Order> {
    let n_buyers = rng.random_range(0..=8u32);
    let n_sellers = rng.random_range(0..=8u32);
    let mut orders = Vec::new();
    let quantity = |rng: &mut R| {
        if rng.random::<bool>() {
            grid_qty(rng)
        } else {
            Qty::from_kwh(rng.random_range(0.01..4.0)).expect("finite draw")
        }
    };
    for i in 0..n_buyers {
        orders.push(Order {
            agent: AgentId(i),
            side: Side::Buy,
            price: arm_price(rng, constants),
            quantity: quantity(rng),
        });
    }
    for i in 0..n_sellers {
        orders.push(Order {
            agent: AgentId(n_buyers + i),
            side: Side::Sell,
            price: arm_price(rng, constants),
            quantity: quantity(rng),
        });
    }
    orders
}

/// Draws roles and truthful quantities for a deviation test (prices are
/// assigned by the test itself).
pub fn random_deviation_instance<R: Rng>(rng: &mut R) -> super::DeviationInstance {
    let n_buyers = rng.random_range(1..=4u32);
    let n_sellers = rng.random_range(1..=4u32);
    let mut participants = Vec::new();
    for i in 0..n_buyers {
        participants.push((AgentId(i), Side::Buy, grid_qty(rng)));
    }
    for i in 0..n_sellers {
        participants.push((AgentId(n_buyers + i), Side::Sell, grid_qty(rng)));
    }
    super::DeviationInstance { participants }
}
