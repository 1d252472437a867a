//! Independent brute-force verifiers for the mechanisms' game-theoretic
//! properties: maximum-volume ground truth, strategy-proofness deviation
//! tests, ex-post Nash checks, and budget-balance audits on small
//! instances.

mod audit;
mod bruteforce;
mod deviation;
mod instances;
mod nash;
mod suite;

pub use audit::{budget_balance_audit, AuditReport, AuditViolation};
pub use bruteforce::mvm_volume_bruteforce;
pub use deviation::{agent_utility, deviation_test, DeviationInstance, DeviationReport};
pub use instances::{random_book, random_deviation_instance, random_small_instance, SmallInstance};
pub use nash::{ex_post_nash_check, NashReport, NashWitness};
pub use suite::{run_full_suite, OracleSuiteReport, SuiteParams};

use crate::market::{Order, Side};
use serde::Serialize;

/// Human-readable dump of an order for witness reports.
#[derive(Debug, Clone, Serialize)]
pub struct OrderDump {
    pub agent: u32,
    pub side: &'static str,
    pub price_cents: f64,
    pub quantity_kwh: f64,
}

impl From<&Order> for OrderDump {
    fn from(o: &Order) -> OrderDump {
        OrderDump {
            agent: o.agent.0,
            side: match o.side {
                Side::Buy => "buy",
                Side::Sell => "sell",
            },
            price_cents: o.price.as_cents(),
            quantity_kwh: o.quantity.as_kwh(),
        }
    }
}

pub(crate) fn dump_orders(orders: &[Order]) -> Vec<OrderDump> {
    orders.iter().map(OrderDump::from).collect()
}
