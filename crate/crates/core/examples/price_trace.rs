//! Prints the clearing-price trajectory of one hour-auction, plus summary
//! statistics. Handy for eyeballing convergence.
//!
//! Usage: cargo run --release --example price_trace -- [mechanism] [seed] [hour]

use wattmarket_core::engine::{run_experiment, ExperimentConfig};
use wattmarket_core::metrics::{convergence_summary, RoundMetrics};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mechanism = args
        .get(1)
        .map(|s| s.parse().expect("mechanism"))
        .unwrap_or(wattmarket_core::clearing::Mechanism::KDouble);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1);
    let hour: u8 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(9);

    let config = ExperimentConfig {
        mechanism,
        seed,
        hours: vec![hour],
        ..ExperimentConfig::default()
    };
    let constants = config.constants.clone();
    let mut rows = Vec::new();
    let start = std::time::Instant::now();
    run_experiment(&config, |record| {
        rows.push(RoundMetrics::from_record(record, &constants));
    })
    .expect("run");
    let elapsed = start.elapsed();

    for (i, m) in rows.iter().enumerate() {
        if i % 10 == 0 || i + 1 == rows.len() {
            println!(
                "round {:3}  buy {:>7}  sell {:>7}  cleared {:8.2} kWh  ratio {:.3}  s_au {:8.2}c",
                i,
                m.buyer_price.map_or("-".into(), |p| format!("{p:.2}")),
                m.seller_price.map_or("-".into(), |p| format!("{p:.2}")),
                m.cleared_volume.as_kwh(),
                m.demand_supply_ratio,
                m.auctioneer_surplus.as_cents(),
            );
        }
    }
    let prices: Vec<Option<f64>> = rows.iter().map(|m| m.buyer_price).collect();
    let volumes: Vec<f64> = rows.iter().map(|m| m.cleared_volume.as_kwh()).collect();
    let center =
        constants.k * constants.p_ur.as_cents() + (1.0 - constants.k) * constants.p_fit.as_cents();
    let s = convergence_summary(&prices, &volumes, center, 1.0, 100.min(prices.len()));
    println!("mechanism {mechanism} seed {seed} hour {hour}: {elapsed:?}");
    println!(
        "entry into {center}+/-1: {:?}; window mean price {:.3} (std {:.3}), volume {:.1} (std {:.1})",
        s.entry_round, s.mean_price, s.std_price, s.mean_volume, s.std_volume
    );
}
