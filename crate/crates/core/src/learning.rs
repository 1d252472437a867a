//! Per-agent bandit state, the normalized reward, and the three
//! arm-selection policies.

use crate::market::{MarketConstants, Money, Price, Qty, Side, SignedQuantity};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearningError {
    #[error("agent has zero net quantity this round")]
    ZeroQuantity,
    #[error("reward {0} outside [0, 1]")]
    RewardRangeViolation(f64),
}

/// Which arm-selection policy an agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyTag {
    Ucb1,
    Ucb2,
    EpsGreedy,
}

impl PolicyTag {
    pub const ALL: [PolicyTag; 3] = [PolicyTag::Ucb1, PolicyTag::Ucb2, PolicyTag::EpsGreedy];

    pub fn name(self) -> &'static str {
        match self {
            PolicyTag::Ucb1 => "ucb1",
            PolicyTag::Ucb2 => "ucb2",
            PolicyTag::EpsGreedy => "eps-greedy",
        }
    }
}

/// Tunables for epsilon-greedy and UCB2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Exploration probability of epsilon-greedy, in (0, 1).
    pub epsilon: f64,
    /// Epoch growth rate of UCB2, > 0.
    pub alpha: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            epsilon: 0.1,
            alpha: 0.1,
        }
    }
}

/// One agent's bandit state for one hour-auction: per-arm pull counts and
/// average rewards, plus the UCB2 epoch bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub pull_counts: Vec<u32>,
    pub avg_rewards: Vec<f64>,
    pub total_pulls: u32,
    pub ucb2_epochs: Vec<u32>,
    pub policy: PolicyTag,
    committed_arm: Option<usize>,
    commit_remaining: u32,
}

impl LearnerState {
    pub fn new(arms: usize, policy: PolicyTag) -> LearnerState {
        LearnerState {
            pull_counts: vec![0; arms],
            avg_rewards: vec![0.0; arms],
            total_pulls: 0,
            ucb2_epochs: vec![0; arms],
            policy,
            committed_arm: None,
            commit_remaining: 0,
        }
    }

    pub fn arm_count(&self) -> usize {
        self.pull_counts.len()
    }

    /// Next arm under this state's policy. UCB2's epoch commitment is
    /// honored here: a committed arm replays until its epoch runs out.
    pub fn choose<R: Rng>(&mut self, params: &PolicyParams, rng: &mut R) -> usize {
        match self.policy {
            PolicyTag::Ucb1 => select_arm_ucb1(self),
            PolicyTag::EpsGreedy => select_arm_eps_greedy(self, params, rng),
            PolicyTag::Ucb2 => {
                if self.commit_remaining > 0 {
                    self.commit_remaining -= 1;
                    return self.committed_arm.expect("commitment carries an arm");
                }
                let (arm, length) = select_arm_ucb2(self, params);
                // Initialization plays are not epochs.
                if self.pull_counts[arm] > 0 {
                    self.ucb2_epochs[arm] += 1;
                }
                self.committed_arm = Some(arm);
                self.commit_remaining = length - 1;
                arm
            }
        }
    }

    fn unpulled_arm(&self) -> Option<usize> {
        self.pull_counts.iter().position(|&c| c == 0)
    }

    fn argmax_avg(&self) -> usize {
        argmax(&self.avg_rewards)
    }
}

/// Lowest index attaining the maximum.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Payoff bounds of an agent with signed round quantity `q`: a buyer pays
/// everything at P_UR in the worst case and P_FIT in the best; a seller's
/// bounds are reversed. Lower <= upper always.
pub fn payoff_bounds(
    q: SignedQuantity,
    constants: &MarketConstants,
) -> Result<(Money, Money), LearningError> {
    let side = q.side().ok_or(LearningError::ZeroQuantity)?;
    let (low, high) = match side {
        Side::Buy => (constants.p_ur, constants.p_fit),
        Side::Sell => (constants.p_fit, constants.p_ur),
    };
    Ok((low.times_signed(q), high.times_signed(q)))
}

/// One agent's settlement for a round: the signed net quantity, the
/// auction fills, and the residual routed to the utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundResult {
    pub signed_quantity: SignedQuantity,
    /// (quantity, unit price) auction fills, quantities as magnitudes.
    pub fills: Vec<(Qty, Price)>,
    pub utility_quantity: Qty,
}

/// Normalized reward in [0, 1].
///
/// The payoff is rescaled between the agent's worst case (trading entirely
/// at its own utility rate) and best case (entirely at the counterparty's
/// rate). Fill prices inside [P_FIT, P_UR] use the linear rescaling; a
/// volume-weighted fill price below P_FIT pins the reward to 1 for buyers
/// and 0 for sellers, and above P_UR to 0 for buyers and 1 for sellers. An
/// agent with no fills earns 0.
pub fn normalized_reward(
    result: &RoundResult,
    constants: &MarketConstants,
) -> Result<f64, LearningError> {
    let side = result
        .signed_quantity
        .side()
        .ok_or(LearningError::ZeroQuantity)?;
    if result.fills.is_empty() {
        return Ok(0.0);
    }

    let mut fill_value = Money::ZERO;
    let mut fill_volume = Qty::ZERO;
    for (quantity, price) in &result.fills {
        fill_value += price.times(*quantity);
        fill_volume += *quantity;
    }
    // Branch on the volume-weighted fill price, compared exactly:
    // mean(p) < P_FIT  <=>  sum(p*q) < P_FIT * sum(q).
    if fill_value < constants.p_fit.times(fill_volume) {
        return Ok(match side {
            Side::Buy => 1.0,
            Side::Sell => 0.0,
        });
    }
    if fill_value > constants.p_ur.times(fill_volume) {
        return Ok(match side {
            Side::Buy => 0.0,
            Side::Sell => 1.0,
        });
    }

    let (lower, upper) = payoff_bounds(result.signed_quantity, constants)?;
    let utility_rate = match side {
        Side::Buy => constants.p_ur,
        Side::Sell => constants.p_fit,
    };
    // Buyer cash flows are negative: fills and the utility residual are
    // payments out.
    let payoff = match side {
        Side::Buy => -fill_value - utility_rate.times(result.utility_quantity),
        Side::Sell => fill_value + utility_rate.times(result.utility_quantity),
    };
    debug_assert!(lower <= payoff && payoff <= upper);
    let num = (payoff - lower).units() as f64;
    let den = (upper - lower).units() as f64;
    Ok(num / den)
}

/// UCB1: play each arm once, then the arm with the best average reward
/// plus the sqrt(2 ln n / n_m) confidence bonus. Ties break to the lowest
/// index.
pub fn select_arm_ucb1(state: &LearnerState) -> usize {
    if let Some(arm) = state.unpulled_arm() {
        return arm;
    }
    let n = state.total_pulls as f64;
    let scores: Vec<f64> = state
        .avg_rewards
        .iter()
        .zip(&state.pull_counts)
        .map(|(avg, &count)| avg + (2.0 * n.ln() / count as f64).sqrt())
        .collect();
    argmax(&scores)
}

/// Epoch length table of UCB2: tau(r) = ceil((1 + alpha)^r).
fn ucb2_tau(alpha: f64, r: u32) -> u64 {
    (1.0 + alpha).powi(r as i32).ceil() as u64
}

/// UCB2: like UCB1 but with the a(n, r) bonus and epoch commitments.
/// Returns the chosen arm and the number of rounds to play it,
/// tau(r+1) - tau(r), floored at one so ceiling collisions still progress.
pub fn select_arm_ucb2(state: &LearnerState, params: &PolicyParams) -> (usize, u32) {
    if let Some(arm) = state.unpulled_arm() {
        return (arm, 1);
    }
    let alpha = params.alpha;
    let n = state.total_pulls as f64;
    let scores: Vec<f64> = state
        .avg_rewards
        .iter()
        .zip(&state.ucb2_epochs)
        .map(|(avg, &r)| {
            let tau = ucb2_tau(alpha, r) as f64;
            avg + ((1.0 + alpha) * (std::f64::consts::E * n / tau).ln() / (2.0 * tau)).sqrt()
        })
        .collect();
    let arm = argmax(&scores);
    let r = state.ucb2_epochs[arm];
    let length = ucb2_tau(alpha, r + 1)
        .saturating_sub(ucb2_tau(alpha, r))
        .max(1);
    (arm, length as u32)
}

/// Epsilon-greedy: exploit the best average with probability 1 - epsilon,
/// otherwise pick uniformly among the other M - 1 arms.
pub fn select_arm_eps_greedy<R: Rng>(
    state: &LearnerState,
    params: &PolicyParams,
    rng: &mut R,
) -> usize {
    let best = state.argmax_avg();
    if rng.random::<f64>() >= params.epsilon {
        return best;
    }
    let others = state.arm_count() - 1;
    if others == 0 {
        return best;
    }
    let pick = rng.random_range(0..others);
    if pick < best {
        pick
    } else {
        pick + 1
    }
}

/// Folds one (arm, reward) observation into the state with an incremental
/// mean update.
pub fn update_state(
    state: &mut LearnerState,
    arm: usize,
    reward: f64,
) -> Result<(), LearningError> {
    if !(0.0..=1.0).contains(&reward) || !reward.is_finite() {
        return Err(LearningError::RewardRangeViolation(reward));
    }
    state.pull_counts[arm] += 1;
    state.total_pulls += 1;
    let count = state.pull_counts[arm] as f64;
    state.avg_rewards[arm] += (reward - state.avg_rewards[arm]) / count;
    Ok(())
}
