//! The combined oracle suite run by `verify`: maximum-volume equivalence,
//! budget-balance audits, strategy-proofness sweeps, and ex-post Nash
//! checks.

use super::audit::{budget_balance_audit, AuditReport};
use super::bruteforce::mvm_volume_bruteforce;
use super::deviation::{deviation_test, DeviationInstance, DeviationReport};
use super::instances::{oracle_rng, random_deviation_instance, random_small_instance};
use super::nash::{ex_post_nash_check, NashReport};
use crate::clearing::{build_stacks, clear_mvm, Mechanism};
use crate::market::{AgentId, MarketConstants, Money, Qty, Side};
use rand::Rng;
use serde::Serialize;

/// Sweep sizes for one full oracle run.
#[derive(Debug, Clone, Copy)]
pub struct SuiteParams {
    pub mvm_instances: u64,
    pub audit_instances: u64,
    pub deviation_instances: u64,
    pub nash_instances: u64,
    pub seed: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            mvm_instances: 1500,
            audit_instances: 10_000,
            deviation_instances: 200,
            nash_instances: 40,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MvmMismatch {
    pub instance_index: u64,
    pub cleared_kwh: f64,
    pub bruteforce_kwh: f64,
    pub orders: Vec<super::OrderDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MvmEquivalence {
    pub instances: u64,
    pub mismatches: Vec<MvmMismatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationSweep {
    pub instances: u64,
    /// Strict-gain reports for the strategy-proof mechanisms (must stay
    /// empty).
    pub mcafee_violations: Vec<DeviationReport>,
    pub vickrey_violations: Vec<DeviationReport>,
    /// A seller profitably deviating inside (P_FIT, P_UR) on an
    /// over-demanded book (required to exist).
    pub k_double_witness: Option<DeviationReport>,
    /// A buyer profitably underbidding P_UR on an over-supplied book
    /// (required to exist).
    pub mvm_witness: Option<DeviationReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NashCaseReport {
    pub case: &'static str,
    pub checks: u64,
    pub failures: Vec<NashReport>,
}

/// Everything `verify` reports.
#[derive(Debug, Clone, Serialize)]
pub struct OracleSuiteReport {
    pub mvm_equivalence: MvmEquivalence,
    pub budget_audits: Vec<AuditReport>,
    pub deviation_sweep: DeviationSweep,
    pub nash_cases: Vec<NashCaseReport>,
    pub passed: bool,
}

/// Runs the whole suite.
pub fn run_full_suite(constants: &MarketConstants, params: &SuiteParams) -> OracleSuiteReport {
    let mvm_equivalence = mvm_equivalence_sweep(constants, params);
    let budget_audits: Vec<AuditReport> = Mechanism::ALL
        .iter()
        .map(|m| budget_balance_audit(*m, params.audit_instances, params.seed, constants))
        .collect();
    let deviation_sweep = deviation_sweeps(constants, params);
    let nash_cases = nash_sweeps(constants, params);

    let passed = mvm_equivalence.mismatches.is_empty()
        && budget_audits.iter().all(|a| a.passed())
        && deviation_sweep.mcafee_violations.is_empty()
        && deviation_sweep.vickrey_violations.is_empty()
        && deviation_sweep.k_double_witness.is_some()
        && deviation_sweep.mvm_witness.is_some()
        && nash_cases.iter().all(|c| c.failures.is_empty());
    OracleSuiteReport {
        mvm_equivalence,
        budget_audits,
        deviation_sweep,
        nash_cases,
        passed,
    }
}

fn mvm_equivalence_sweep(constants: &MarketConstants, params: &SuiteParams) -> MvmEquivalence {
    let mut mismatches = Vec::new();
    for index in 0..params.mvm_instances {
        let mut rng = oracle_rng(params.seed ^ 0x11, index);
        let instance = random_small_instance(&mut rng, constants);
        let cleared = clear_mvm(&build_stacks(&instance.orders), constants).cleared_volume;
        let truth = mvm_volume_bruteforce(&instance);
        if cleared != truth {
            mismatches.push(MvmMismatch {
                instance_index: index,
                cleared_kwh: cleared.as_kwh(),
                bruteforce_kwh: truth.as_kwh(),
                orders: super::dump_orders(&instance.orders),
            });
        }
    }
    MvmEquivalence {
        instances: params.mvm_instances,
        mismatches,
    }
}

fn deviation_sweeps(constants: &MarketConstants, params: &SuiteParams) -> DeviationSweep {
    let mut mcafee_violations = Vec::new();
    let mut vickrey_violations = Vec::new();
    let mut k_double_witness = None;
    let mut mvm_witness = None;

    for index in 0..params.deviation_instances {
        let mut rng = oracle_rng(params.seed ^ 0x22, index);
        let instance = random_deviation_instance(&mut rng);
        for (agent, side, _) in instance.participants.clone() {
            // Strategy-proof mechanisms: no arm may strictly beat truth.
            for (mechanism, violations) in [
                (Mechanism::McAfee, &mut mcafee_violations),
                (Mechanism::VickreyVariant, &mut vickrey_violations),
            ] {
                let report = deviation_test(mechanism, &instance, agent, constants);
                if report.best_gain() > Money::ZERO {
                    violations.push(report);
                }
            }
            // Manipulable mechanisms: look for the construction witnesses.
            if k_double_witness.is_none()
                && side == Side::Sell
                && instance.total(Side::Sell) <= instance.total(Side::Buy)
            {
                let report = deviation_test(Mechanism::KDouble, &instance, agent, constants);
                let strict_interior = report.strict_gain_arms().into_iter().any(|m| {
                    let p = constants.price_of_arm(m);
                    p > constants.p_fit && p < constants.p_ur
                });
                if strict_interior {
                    k_double_witness = Some(report);
                }
            }
            if mvm_witness.is_none()
                && side == Side::Buy
                && instance.total(Side::Sell) >= instance.total(Side::Buy)
            {
                let report = deviation_test(Mechanism::Mvm, &instance, agent, constants);
                let strict_below = report
                    .strict_gain_arms()
                    .into_iter()
                    .any(|m| constants.price_of_arm(m) < constants.p_ur);
                if strict_below {
                    mvm_witness = Some(report);
                }
            }
        }
    }
    DeviationSweep {
        instances: params.deviation_instances,
        mcafee_violations,
        vickrey_violations,
        k_double_witness,
        mvm_witness,
    }
}

fn nash_sweeps(constants: &MarketConstants, params: &SuiteParams) -> Vec<NashCaseReport> {
    let mut oversupplied = NashCaseReport {
        case: "oversupplied-at-feed-in",
        checks: 0,
        failures: Vec::new(),
    };
    let mut overdemanded = NashCaseReport {
        case: "overdemanded-at-retail",
        checks: 0,
        failures: Vec::new(),
    };
    let mut balanced = NashCaseReport {
        case: "balanced-at-any-grid-price",
        checks: 0,
        failures: Vec::new(),
    };

    let in_band_prices: Vec<_> = constants
        .arm_prices
        .iter()
        .copied()
        .filter(|p| *p >= constants.p_fit && *p <= constants.p_ur)
        .collect();

    for index in 0..params.nash_instances {
        let mut rng = oracle_rng(params.seed ^ 0x33, index);
        let base = random_deviation_instance(&mut rng);

        let over_supplied = force_imbalance(&base, Side::Sell);
        oversupplied.checks += 1;
        let report = ex_post_nash_check(&over_supplied, constants.p_fit, constants);
        if !report.passed {
            oversupplied.failures.push(report);
        }

        let over_demanded = force_imbalance(&base, Side::Buy);
        overdemanded.checks += 1;
        let report = ex_post_nash_check(&over_demanded, constants.p_ur, constants);
        if !report.passed {
            overdemanded.failures.push(report);
        }

        let balanced_instance = force_balance(&base, &mut rng);
        for price in &in_band_prices {
            balanced.checks += 1;
            let report = ex_post_nash_check(&balanced_instance, *price, constants);
            if !report.passed {
                balanced.failures.push(report);
            }
        }
    }
    vec![oversupplied, overdemanded, balanced]
}

/// Tops up the `long` side with one extra order so its total strictly
/// exceeds the other side's.
fn force_imbalance(base: &DeviationInstance, long: Side) -> DeviationInstance {
    let mut instance = base.clone();
    let (buy, sell) = (instance.total(Side::Buy), instance.total(Side::Sell));
    let deficit = match long {
        Side::Sell => buy.saturating_sub(sell),
        Side::Buy => sell.saturating_sub(buy),
    };
    let next_id = AgentId(instance.participants.len() as u32);
    instance
        .participants
        .push((next_id, long, deficit + Qty::from_units(500_000_000)));
    instance
}

/// Replaces the sell side with draws summing exactly to the buy total.
fn force_balance<R: Rng>(base: &DeviationInstance, rng: &mut R) -> DeviationInstance {
    let buyers: Vec<_> = base
        .participants
        .iter()
        .filter(|(_, s, _)| *s == Side::Buy)
        .cloned()
        .collect();
    let total = buyers.iter().map(|(_, _, q)| *q).sum::<Qty>();
    let mut participants = buyers;
    let mut remaining = total;
    let mut next_id = participants.len() as u32;
    while !remaining.is_zero() {
        let max_units = (remaining.units() / 500_000_000).min(8);
        let units = rng.random_range(1..=max_units.max(1));
        let quantity = Qty::from_units(units * 500_000_000).min(remaining);
        participants.push((AgentId(next_id), Side::Sell, quantity));
        remaining = remaining - quantity;
        next_id += 1;
    }
    DeviationInstance { participants }
}
