//! Deterministic simulator and mechanism library for repeated peer-to-peer
//! energy double auctions.
//!
//! The crate is organized around the life of one auction round:
//!
//! - [`market`] holds the shared domain types: prices, quantities, orders,
//!   agents, and market-wide constants.
//! - [`clearing`] implements the four clearing mechanisms (k-double,
//!   Vickrey-variant, McAfee, maximum volume matching) as pure functions of
//!   an order book.
//! - [`learning`] provides the normalized reward and the three bandit
//!   policies (UCB1, UCB2, epsilon-greedy) agents use to pick price arms.
//! - [`engine`] runs the repeated game: type sampling, bidding, clearing,
//!   reward feedback, and regeneration, fully deterministic under a seed.
//! - [`metrics`] computes per-round market metrics and emits stable CSV.
//! - [`oracle`] contains independent brute-force verifiers for the
//!   game-theoretic properties of the mechanisms.

pub mod clearing;
pub mod engine;
pub mod learning;
pub mod market;
pub mod metrics;
pub mod oracle;

pub use clearing::{
    agent_surplus, build_stacks, classify_vickrey_case, clear_k_double, clear_mcafee, clear_mvm,
    clear_vickrey_variant, find_intersection, ClearingError, ClearingOutcome, Intersection,
    MarketStacks, MatchedPair, Mechanism, VickreyCase,
};
pub use engine::{run_experiment, AgentRuntime, ExperimentConfig, RoundRecord};
pub use learning::{
    normalized_reward, payoff_bounds, update_state, LearnerState, LearningError, PolicyParams,
    PolicyTag, RoundResult,
};
pub use market::{
    default_constants, validate_order, AgentClass, AgentId, MarketConstants, MarketError, Money,
    Order, Price, Qty, Side, SignedQuantity,
};
