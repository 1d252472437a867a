//! Total agent surplus of a clearing outcome.

use super::outcome::ClearingOutcome;
use crate::market::{MarketConstants, Money, Side};

/// Buyer and seller surplus in exact money.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurplusBreakdown {
    pub buyer: Money,
    pub seller: Money,
}

impl SurplusBreakdown {
    pub fn total(&self) -> Money {
        self.buyer + self.seller
    }
}

/// Buyers gain (P_UR - p) per cleared kWh relative to buying from the
/// utility; sellers (at zero marginal cost) earn their receipts, with
/// uncleared supply sold to the utility at P_FIT. Residual demand routed to
/// the utility contributes nothing. Computed per agent, this reproduces the
/// closed-form totals of each mechanism exactly.
pub fn agent_surplus(outcome: &ClearingOutcome, constants: &MarketConstants) -> SurplusBreakdown {
    let mut buyer = Money::ZERO;
    let mut seller = Money::ZERO;
    for a in &outcome.agents {
        match a.side {
            Side::Buy => {
                for f in &a.fills {
                    buyer += (constants.p_ur - f.price).times(f.quantity);
                }
            }
            Side::Sell => {
                for f in &a.fills {
                    seller += f.price.times(f.quantity);
                }
                seller += constants.p_fit.times(a.uncleared);
            }
        }
    }
    SurplusBreakdown { buyer, seller }
}
