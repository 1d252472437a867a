//! Budget-balance audits over seeded random books.

use super::dump_orders;
use super::instances::{oracle_rng, random_book};
use crate::clearing::{build_stacks, Mechanism};
use crate::market::{MarketConstants, Money};
use serde::Serialize;

/// One offending instance: the book and the net payment that broke the
/// mechanism's budget-balance class.
#[derive(Debug, Clone, Serialize)]
pub struct AuditViolation {
    pub instance_index: u64,
    pub net_payment_cents: f64,
    pub orders: Vec<super::OrderDump>,
}

/// Outcome of auditing `instances` random books under one mechanism.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub mechanism: Mechanism,
    pub instances: u64,
    /// Books where the k-double netted nonzero payment, or a weakly
    /// budget-balanced mechanism netted a loss.
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays `n` seeded random books and checks the net payment recomputed
/// from per-agent fills: exactly zero for the k-double (strong budget
/// balance), never negative for the others (weak budget balance).
pub fn budget_balance_audit(
    mechanism: Mechanism,
    n: u64,
    seed: u64,
    constants: &MarketConstants,
) -> AuditReport {
    let mut violations = Vec::new();
    for index in 0..n {
        let mut rng = oracle_rng(seed, index);
        let orders = random_book(&mut rng, constants);
        let outcome = mechanism.clear(&build_stacks(&orders), constants);
        let net = outcome.net_auctioneer_payment();
        let ok = match mechanism {
            Mechanism::KDouble => net == Money::ZERO,
            _ => net >= Money::ZERO,
        };
        // The structural surplus must agree with the recomputed payments.
        let consistent = net == outcome.auctioneer_surplus;
        if !ok || !consistent {
            violations.push(AuditViolation {
                instance_index: index,
                net_payment_cents: net.as_cents(),
                orders: dump_orders(&orders),
            });
        }
    }
    AuditReport {
        mechanism,
        instances: n,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::default_constants;

    #[test]
    fn k_double_nets_exactly_zero_on_a_thousand_books() {
        let c = default_constants();
        let report = budget_balance_audit(Mechanism::KDouble, 1000, 11, &c);
        assert!(report.passed(), "violations: {:?}", report.violations);
    }

    #[test]
    fn weakly_balanced_mechanisms_never_net_a_loss() {
        let c = default_constants();
        for mechanism in [Mechanism::VickreyVariant, Mechanism::McAfee, Mechanism::Mvm] {
            let report = budget_balance_audit(mechanism, 1000, 13, &c);
            assert!(
                report.passed(),
                "{mechanism} violations: {:?}",
                report.violations
            );
        }
    }
}
