//! Market-outcome and learning-diagnostic metrics with stable file
//! emission.

use crate::clearing::{agent_surplus, Mechanism};
use crate::engine::RoundRecord;
use crate::market::{MarketConstants, Money, Qty, Side};
use serde::Serialize;
use std::io::Write;

/// One row of the per-round metrics table. Money and volume fields stay on
/// the exact fixed-point types; formatting happens at emission.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub day: u32,
    pub hour: u8,
    pub cleared_volume: Qty,
    pub agent_surplus: Money,
    pub auctioneer_surplus: Money,
    /// Volume-weighted buyer price in cents (equals the uniform price for
    /// uniform mechanisms); `None` when nothing cleared.
    pub buyer_price: Option<f64>,
    pub seller_price: Option<f64>,
    pub demand_supply_ratio: f64,
    pub total_demand: Qty,
    pub total_supply: Qty,
    /// Population profile over arms for the round.
    pub profile: Vec<f64>,
}

impl RoundMetrics {
    pub fn from_record(record: &RoundRecord, constants: &MarketConstants) -> RoundMetrics {
        let surplus = agent_surplus(&record.outcome, constants);
        let total_demand: Qty = record
            .outcome
            .agents
            .iter()
            .filter(|a| a.side == Side::Buy)
            .map(|a| a.submitted)
            .sum();
        let metrics = RoundMetrics {
            day: record.day,
            hour: record.hour,
            cleared_volume: record.outcome.cleared_volume,
            agent_surplus: surplus.total(),
            auctioneer_surplus: record.outcome.auctioneer_surplus,
            buyer_price: record.outcome.volume_weighted_price(Side::Buy),
            seller_price: record.outcome.volume_weighted_price(Side::Sell),
            demand_supply_ratio: record.demand_supply_ratio,
            total_demand,
            total_supply: record.outcome.total_supply(),
            profile: record.profile.clone(),
        };
        debug_assert!(metrics.conservation_holds(constants));
        metrics
    }

    /// The conservation identity S_hat + S_au = P_UR*Q_c + P_FIT*(Q_s - Q_c),
    /// exact in fixed-point money.
    pub fn conservation_holds(&self, constants: &MarketConstants) -> bool {
        let rhs = constants.p_ur.times(self.cleared_volume)
            + constants
                .p_fit
                .times(self.total_supply - self.cleared_volume);
        self.agent_surplus + self.auctioneer_surplus == rhs
    }
}

/// Volume-weighted average price of a set of (price cents, volume kWh)
/// fills; `None` on zero volume.
pub fn volume_weighted_price(fills: &[(f64, f64)]) -> Option<f64> {
    let volume: f64 = fills.iter().map(|(_, q)| q).sum();
    if volume <= 0.0 {
        return None;
    }
    Some(fills.iter().map(|(p, q)| p * q).sum::<f64>() / volume)
}

const CSV_HEADER: &str = "mechanism,seed,hour,day,cleared_kwh,agent_surplus_cents,auctioneer_surplus_cents,buyer_price,seller_price,ds_ratio";

/// Writes the metrics stream as CSV: pinned header, one row per round in
/// (hour, day) order, fixed decimal formatting (prices 4 decimals, kWh 6),
/// byte-stable across runs with equal inputs. Undefined prices emit as
/// empty fields.
pub fn emit_csv<'a, W: Write, I: IntoIterator<Item = &'a RoundMetrics>>(
    rows: I,
    mechanism: Mechanism,
    seed: u64,
    writer: &mut W,
) -> std::io::Result<()> {
    writeln!(writer, "{CSV_HEADER}")?;
    for m in rows {
        writeln!(
            writer,
            "{},{},{},{},{:.6},{:.4},{:.4},{},{},{}",
            mechanism,
            seed,
            m.hour,
            m.day,
            m.cleared_volume.as_kwh(),
            m.agent_surplus.as_cents(),
            m.auctioneer_surplus.as_cents(),
            format_opt_price(m.buyer_price),
            format_opt_price(m.seller_price),
            format_ratio(m.demand_supply_ratio),
        )?;
    }
    Ok(())
}

fn format_opt_price(price: Option<f64>) -> String {
    match price {
        Some(p) => format!("{p:.4}"),
        None => String::new(),
    }
}

fn format_ratio(ratio: f64) -> String {
    if ratio.is_finite() {
        format!("{ratio:.6}")
    } else {
        String::new()
    }
}

/// Where a price series settles: entry round into a band it never leaves,
/// plus windowed statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    /// First and last round of the statistics window.
    pub window_start: usize,
    pub window_end: usize,
    pub mean_price: f64,
    pub std_price: f64,
    pub mean_volume: f64,
    pub std_volume: f64,
    /// First round whose price enters [center - halfwidth, center +
    /// halfwidth] and never exits afterwards; `None` if the series never
    /// settles in the band.
    pub entry_round: Option<usize>,
}

/// Summarizes a clearing-price series against a band around `center`.
/// Rounds with no trade (`None` price) count as outside the band. The
/// statistics window is the final `window` rounds.
pub fn convergence_summary(
    prices: &[Option<f64>],
    volumes: &[f64],
    center: f64,
    halfwidth: f64,
    window: usize,
) -> ConvergenceSummary {
    assert_eq!(prices.len(), volumes.len());
    assert!(window >= 1 && window <= prices.len());
    let in_band = |p: &Option<f64>| p.is_some_and(|v| (v - center).abs() <= halfwidth + 1e-12);
    // Walk backwards over the longest all-in-band suffix.
    let mut entry_round = None;
    for (i, p) in prices.iter().enumerate().rev() {
        if in_band(p) {
            entry_round = Some(i);
        } else {
            break;
        }
    }
    let start = prices.len() - window;
    let window_prices: Vec<f64> = prices[start..].iter().filter_map(|p| *p).collect();
    let (mean_price, std_price) = mean_std(&window_prices);
    let (mean_volume, std_volume) = mean_std(&volumes[start..]);
    ConvergenceSummary {
        window_start: start,
        window_end: prices.len() - 1,
        mean_price,
        std_price,
        mean_volume,
        std_volume,
        entry_round,
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Empirical cumulative regret of a probe: the best fixed arm in hindsight
/// (by cumulative counterfactual reward) minus the realized cumulative
/// reward, floored at zero round by round.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    /// Cumulative regret after each recorded round.
    pub cumulative: Vec<f64>,
    /// Cumulative regret divided by rounds elapsed.
    pub average: Vec<f64>,
    /// Reference no-regret bound shape alpha(M) * ln(D) / D with
    /// alpha(M) = 8M, for visual comparison.
    pub bound_shape: Vec<f64>,
}

/// Computes the regret curve from a probe's per-round history of
/// (realized reward, counterfactual rewards per arm).
pub fn empirical_regret(history: &[(f64, Vec<f64>)]) -> RegretCurve {
    let rounds = history.len();
    if rounds == 0 {
        return RegretCurve {
            cumulative: Vec::new(),
            average: Vec::new(),
            bound_shape: Vec::new(),
        };
    }
    let arms = history[0].1.len();
    let mut arm_totals = vec![0.0; arms];
    let mut realized_total = 0.0;
    let mut cumulative = Vec::with_capacity(rounds);
    let mut average = Vec::with_capacity(rounds);
    let mut bound_shape = Vec::with_capacity(rounds);
    for (t, (realized, counterfactual)) in history.iter().enumerate() {
        realized_total += realized;
        for (total, c) in arm_totals.iter_mut().zip(counterfactual) {
            *total += c;
        }
        let best = arm_totals.iter().cloned().fold(f64::MIN, f64::max);
        let regret = (best - realized_total).max(0.0);
        cumulative.push(regret);
        let d = (t + 1) as f64;
        average.push(regret / d);
        bound_shape.push(8.0 * arms as f64 * d.ln().max(0.0) / d);
    }
    RegretCurve {
        cumulative,
        average,
        bound_shape,
    }
}
