//! The four double-auction clearing mechanisms and their shared
//! stack/intersection machinery.
//!
//! Every operation here is a pure, deterministic function of the order
//! book: identical inputs produce identical outcomes. All arithmetic runs
//! on the fixed-point types from [`crate::market`], so volume balance and
//! the budget-balance classifications hold exactly rather than to a
//! floating-point tolerance.

mod kdouble;
mod mcafee;
mod mvm;
mod outcome;
mod prorate;
mod stacks;
mod surplus;
mod vickrey;

pub use kdouble::clear_k_double;
pub use mcafee::clear_mcafee;
pub use mvm::clear_mvm;
pub use outcome::{AgentFills, ClearingOutcome, Fill, MatchedPair};
pub use prorate::prorate_uniform;
pub use stacks::{
    ask_order, bid_order, build_stacks, build_stacks_presorted, find_intersection, Intersection,
    MarketStacks, PriceLevel,
};
pub use surplus::{agent_surplus, SurplusBreakdown};
pub use vickrey::{classify_vickrey_case, clear_vickrey_variant, VickreyCase};

use crate::market::MarketConstants;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClearingError {
    #[error("internal invariant violation: {0}")]
    InternalInvariantViolation(String),
}

/// The four clearing mechanisms under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    KDouble,
    VickreyVariant,
    McAfee,
    Mvm,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::KDouble,
        Mechanism::VickreyVariant,
        Mechanism::McAfee,
        Mechanism::Mvm,
    ];

    /// Clears the book with this mechanism.
    pub fn clear(self, stacks: &MarketStacks, constants: &MarketConstants) -> ClearingOutcome {
        match self {
            Mechanism::KDouble => clear_k_double(stacks, constants),
            Mechanism::VickreyVariant => clear_vickrey_variant(stacks, constants),
            Mechanism::McAfee => clear_mcafee(stacks, constants),
            Mechanism::Mvm => clear_mvm(stacks, constants),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::KDouble => "k-double",
            Mechanism::VickreyVariant => "vickrey",
            Mechanism::McAfee => "mcafee",
            Mechanism::Mvm => "mvm",
        }
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mechanism {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "k-double" | "kdouble" | "k05" => Ok(Mechanism::KDouble),
            "vickrey" | "vickrey-variant" | "vv" => Ok(Mechanism::VickreyVariant),
            "mcafee" => Ok(Mechanism::McAfee),
            "mvm" => Ok(Mechanism::Mvm),
            other => Err(format!(
                "unknown mechanism '{other}' (expected k-double, vickrey, mcafee, or mvm)"
            )),
        }
    }
}
