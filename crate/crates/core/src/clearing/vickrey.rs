//! Vickrey-variant double auction: marginal participants set the prices
//! but do not trade.

use super::outcome::{no_trade_outcome, uniform_outcome};
use super::stacks::{find_intersection, Intersection, MarketStacks};
use super::{ClearingOutcome, Mechanism};
use crate::market::MarketConstants;

/// Configuration of the curves at the crossing point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VickreyCase {
    CaseI,
    CaseII,
    /// Both curves step at the same quantity, so neither case's chain of
    /// inequalities holds; cleared with the Case I rules.
    Degenerate,
}

/// Classifies a crossing book into Case I / Case II by the price and
/// quantity conditions on the marginal levels. A missing next-level price
/// satisfies its inequality vacuously. Requires `q_star > 0`.
pub fn classify_vickrey_case(x: &Intersection) -> VickreyCase {
    assert!(
        !x.q_star.is_zero(),
        "classify_vickrey_case requires a crossing book"
    );
    let pb_l = x.marginal_bid.expect("crossing book has a marginal bid");
    let ps_h = x.marginal_ask.expect("crossing book has a marginal ask");

    // Case I: pb_L >= ps_H >= pb_{L+1}, with the cleared bid volume lying
    // between the H-1 and H ask prefixes.
    let case_one = pb_l >= ps_h
        && x.next_bid.is_none_or(|nb| ps_h >= nb)
        && x.prev_ask_quantity <= x.cleared_bid_quantity
        && x.cleared_bid_quantity <= x.cleared_ask_quantity;
    if case_one {
        return VickreyCase::CaseI;
    }
    // Case II: ps_{H+1} >= pb_L >= ps_H, with the mirrored quantity chain.
    let case_two = pb_l >= ps_h
        && x.next_ask.is_none_or(|na| na >= pb_l)
        && x.prev_bid_quantity <= x.cleared_ask_quantity
        && x.cleared_ask_quantity <= x.cleared_bid_quantity;
    if case_two {
        VickreyCase::CaseII
    } else {
        VickreyCase::Degenerate
    }
}

/// Clears buyers up to level L-1 at the uniform price pb_L and sellers up
/// to level H-1 at ps_H, prorating the long side. One marginal level on
/// each side is excluded, so a single-level side trades nothing. The
/// clearing rules are the same in Case I, Case II, and the degenerate
/// configuration.
pub fn clear_vickrey_variant(
    stacks: &MarketStacks,
    _constants: &MarketConstants,
) -> ClearingOutcome {
    clear_vickrey_at(stacks, &find_intersection(stacks))
}

pub(super) fn clear_vickrey_at(stacks: &MarketStacks, x: &Intersection) -> ClearingOutcome {
    if x.q_star.is_zero() || x.bid_levels <= 1 || x.ask_levels <= 1 {
        return no_trade_outcome(Mechanism::VickreyVariant, stacks);
    }
    let pb = x.marginal_bid.expect("crossing book has a marginal bid");
    let ps = x.marginal_ask.expect("crossing book has a marginal ask");
    uniform_outcome(
        Mechanism::VickreyVariant,
        stacks,
        x.bid_levels - 1,
        x.ask_levels - 1,
        pb,
        ps,
    )
}
