//! Sorted demand/supply step curves and the critical intersection point.

use crate::market::{AgentId, Order, Price, Qty, Side};
use serde::{Deserialize, Serialize};

/// One agent's contribution to a price level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub agent: AgentId,
    pub quantity: Qty,
}

/// One step of a stair-wise demand or supply curve. Equal-price orders are
/// merged into a single level; contributors are ordered by agent id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceLevel {
    pub price: Price,
    /// Total quantity at this level.
    pub quantity: Qty,
    /// Running total including this level.
    pub cumulative: Qty,
    pub entries: Vec<LevelEntry>,
}

/// Demand sorted by price descending, supply ascending, both with exact
/// cumulative sums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MarketStacks {
    pub demand: Vec<PriceLevel>,
    pub supply: Vec<PriceLevel>,
}

impl MarketStacks {
    pub fn total_demand(&self) -> Qty {
        self.demand.last().map_or(Qty::ZERO, |l| l.cumulative)
    }

    pub fn total_supply(&self) -> Qty {
        self.supply.last().map_or(Qty::ZERO, |l| l.cumulative)
    }
}

/// Bid ordering within the demand stack: price descending, agent id
/// breaking ties so level contributor lists come out ordered.
pub fn bid_order(a: &Order, b: &Order) -> std::cmp::Ordering {
    b.price.cmp(&a.price).then(a.agent.cmp(&b.agent))
}

/// Ask ordering within the supply stack: price ascending.
pub fn ask_order(a: &Order, b: &Order) -> std::cmp::Ordering {
    a.price.cmp(&b.price).then(a.agent.cmp(&b.agent))
}

/// Sorts the book into the stair-wise demand/supply curves.
pub fn build_stacks(orders: &[Order]) -> MarketStacks {
    let mut bids: Vec<&Order> = orders.iter().filter(|o| o.side == Side::Buy).collect();
    let mut asks: Vec<&Order> = orders.iter().filter(|o| o.side == Side::Sell).collect();
    bids.sort_by(|a, b| bid_order(a, b));
    asks.sort_by(|a, b| ask_order(a, b));
    MarketStacks {
        demand: levels_from_sorted(&bids),
        supply: levels_from_sorted(&asks),
    }
}

/// Builds the curves from bid/ask lists already in stack order (see
/// [`bid_order`] / [`ask_order`]); used by hot paths that maintain sorted
/// books incrementally.
pub fn build_stacks_presorted(bids: &[Order], asks: &[Order]) -> MarketStacks {
    debug_assert!(bids.windows(2).all(|w| bid_order(&w[0], &w[1]).is_le()));
    debug_assert!(asks.windows(2).all(|w| ask_order(&w[0], &w[1]).is_le()));
    let bid_refs: Vec<&Order> = bids.iter().collect();
    let ask_refs: Vec<&Order> = asks.iter().collect();
    MarketStacks {
        demand: levels_from_sorted(&bid_refs),
        supply: levels_from_sorted(&ask_refs),
    }
}

fn levels_from_sorted(orders: &[&Order]) -> Vec<PriceLevel> {
    let mut levels: Vec<PriceLevel> = Vec::new();
    for order in orders {
        match levels.last_mut() {
            Some(level) if level.price == order.price => {
                level.quantity += order.quantity;
                level.entries.push(LevelEntry {
                    agent: order.agent,
                    quantity: order.quantity,
                });
            }
            _ => levels.push(PriceLevel {
                price: order.price,
                quantity: order.quantity,
                cumulative: Qty::ZERO,
                entries: vec![LevelEntry {
                    agent: order.agent,
                    quantity: order.quantity,
                }],
            }),
        }
    }
    let mut running = Qty::ZERO;
    for level in &mut levels {
        running += level.quantity;
        level.cumulative = running;
    }
    levels
}

/// The critical crossing point of the two step curves.
///
/// `bid_levels` (L) and `ask_levels` (H) count the price levels whose
/// cumulative quantities cover `q_star`; `marginal_bid`/`marginal_ask` are
/// the prices of those levels, and `next_bid`/`next_ask` the prices of the
/// first excluded levels when they exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intersection {
    pub q_star: Qty,
    pub bid_levels: usize,
    pub ask_levels: usize,
    pub marginal_bid: Option<Price>,
    pub marginal_ask: Option<Price>,
    pub next_bid: Option<Price>,
    pub next_ask: Option<Price>,
    /// Total bid quantity over levels 1..=L.
    pub cleared_bid_quantity: Qty,
    /// Total ask quantity over levels 1..=H.
    pub cleared_ask_quantity: Qty,
    /// Total bid quantity over levels 1..=L-1.
    pub prev_bid_quantity: Qty,
    /// Total ask quantity over levels 1..=H-1.
    pub prev_ask_quantity: Qty,
    pub total_demand: Qty,
    pub total_supply: Qty,
}

/// Walks the two step curves to find Q* = sup{q >= 0 : demand price at q >=
/// supply price at q}, zero when the curves do not cross.
pub fn find_intersection(stacks: &MarketStacks) -> Intersection {
    let demand = &stacks.demand;
    let supply = &stacks.supply;
    let mut q_star = Qty::ZERO;
    let mut l = 0usize;
    let mut h = 0usize;
    let (mut di, mut si) = (0usize, 0usize);
    while di < demand.len() && si < supply.len() {
        if demand[di].price < supply[si].price {
            break;
        }
        let reach = demand[di].cumulative.min(supply[si].cumulative);
        q_star = reach;
        l = di + 1;
        h = si + 1;
        if demand[di].cumulative == reach {
            di += 1;
        }
        if supply[si].cumulative == reach {
            si += 1;
        }
    }
    if q_star.is_zero() {
        l = 0;
        h = 0;
    }
    let prefix = |levels: &[PriceLevel], n: usize| {
        if n == 0 {
            Qty::ZERO
        } else {
            levels[n - 1].cumulative
        }
    };
    Intersection {
        q_star,
        bid_levels: l,
        ask_levels: h,
        marginal_bid: (l > 0).then(|| demand[l - 1].price),
        marginal_ask: (h > 0).then(|| supply[h - 1].price),
        next_bid: demand.get(l).map(|lvl| lvl.price),
        next_ask: supply.get(h).map(|lvl| lvl.price),
        cleared_bid_quantity: prefix(demand, l),
        cleared_ask_quantity: prefix(supply, h),
        prev_bid_quantity: prefix(demand, l.saturating_sub(1)),
        prev_ask_quantity: prefix(supply, h.saturating_sub(1)),
        total_demand: stacks.total_demand(),
        total_supply: stacks.total_supply(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Price;

    fn bid(agent: u32, price: i64, qty: f64) -> Order {
        Order {
            agent: AgentId(agent),
            side: Side::Buy,
            price: Price::from_cents_int(price),
            quantity: Qty::from_kwh(qty).unwrap(),
        }
    }

    fn ask(agent: u32, price: i64, qty: f64) -> Order {
        Order {
            agent: AgentId(agent),
            side: Side::Sell,
            price: Price::from_cents_int(price),
            quantity: Qty::from_kwh(qty).unwrap(),
        }
    }

    #[test]
    fn stacks_sort_and_accumulate() {
        let orders = vec![
            bid(0, 10, 3.0),
            bid(1, 8, 2.0),
            ask(2, 6, 2.0),
            ask(3, 9, 4.0),
        ];
        let stacks = build_stacks(&orders);
        let d: Vec<(f64, f64)> = stacks
            .demand
            .iter()
            .map(|l| (l.price.as_cents(), l.cumulative.as_kwh()))
            .collect();
        let s: Vec<(f64, f64)> = stacks
            .supply
            .iter()
            .map(|l| (l.price.as_cents(), l.cumulative.as_kwh()))
            .collect();
        assert_eq!(d, vec![(10.0, 3.0), (8.0, 5.0)]);
        assert_eq!(s, vec![(6.0, 2.0), (9.0, 6.0)]);
    }

    #[test]
    fn empty_book_yields_empty_stacks() {
        let stacks = build_stacks(&[]);
        assert!(stacks.demand.is_empty());
        assert!(stacks.supply.is_empty());
        assert_eq!(stacks.total_demand(), Qty::ZERO);
    }

    #[test]
    fn equal_price_orders_merge_with_agents_ascending() {
        let orders = vec![bid(5, 8, 1.0), bid(2, 8, 2.0)];
        let stacks = build_stacks(&orders);
        assert_eq!(stacks.demand.len(), 1);
        let agents: Vec<u32> = stacks.demand[0].entries.iter().map(|e| e.agent.0).collect();
        assert_eq!(agents, vec![2, 5]);
        assert_eq!(stacks.demand[0].quantity.as_kwh(), 3.0);
    }

    #[test]
    fn intersection_of_crossing_curves() {
        let orders = vec![
            bid(0, 10, 3.0),
            bid(1, 8, 2.0),
            ask(2, 6, 2.0),
            ask(3, 9, 4.0),
        ];
        let x = find_intersection(&build_stacks(&orders));
        assert_eq!(x.q_star.as_kwh(), 3.0);
        assert_eq!(x.bid_levels, 1);
        assert_eq!(x.ask_levels, 2);
        assert_eq!(x.marginal_bid, Some(Price::from_cents_int(10)));
        assert_eq!(x.marginal_ask, Some(Price::from_cents_int(9)));
        assert_eq!(x.next_bid, Some(Price::from_cents_int(8)));
        assert_eq!(x.next_ask, None);
    }

    #[test]
    fn no_crossing_when_all_bids_below_all_asks() {
        let orders = vec![bid(0, 4, 3.0), ask(1, 9, 4.0)];
        let x = find_intersection(&build_stacks(&orders));
        assert_eq!(x.q_star, Qty::ZERO);
        assert_eq!(x.bid_levels, 0);
        assert_eq!(x.ask_levels, 0);
        assert_eq!(x.marginal_bid, None);
    }

    #[test]
    fn full_cross_of_balanced_quantities() {
        let orders = vec![bid(0, 11, 4.0), ask(1, 5, 4.0)];
        let x = find_intersection(&build_stacks(&orders));
        assert_eq!(x.q_star.as_kwh(), 4.0);
        assert_eq!(x.marginal_bid, Some(Price::from_cents_int(11)));
        assert_eq!(x.marginal_ask, Some(Price::from_cents_int(5)));
        assert_eq!(x.bid_levels, 1);
        assert_eq!(x.ask_levels, 1);
    }
}
