//! k-double auction: one uniform clearing price for both sides.

use super::outcome::{no_trade_outcome, uniform_outcome};
use super::stacks::{find_intersection, MarketStacks};
use super::{ClearingOutcome, Mechanism};
use crate::market::{MarketConstants, Price};

/// Clears at the uniform price P* = k*pb_L + (1-k)*ps_H. The long side is
/// prorated, the auctioneer nets exactly zero, and residuals fall back to
/// the utility rates.
pub fn clear_k_double(stacks: &MarketStacks, constants: &MarketConstants) -> ClearingOutcome {
    let x = find_intersection(stacks);
    if x.q_star.is_zero() {
        return no_trade_outcome(Mechanism::KDouble, stacks);
    }
    let pb = x.marginal_bid.expect("crossing book has a marginal bid");
    let ps = x.marginal_ask.expect("crossing book has a marginal ask");
    let p_star = combine_prices(constants.k, pb, ps);
    uniform_outcome(
        Mechanism::KDouble,
        stacks,
        x.bid_levels,
        x.ask_levels,
        p_star,
        p_star,
    )
}

/// k*pb + (1-k)*ps on the fixed-point price grid. pb >= ps at any crossing,
/// so the convex combination is computed as ps + k*(pb - ps), rounded to
/// the nearest price unit (exact for the k = 0.5 reference setup on
/// whole-cent arms).
fn combine_prices(k: f64, pb: Price, ps: Price) -> Price {
    let spread = (pb - ps).units();
    Price::from_units(ps.units() + (k * spread as f64).round() as i64)
}
