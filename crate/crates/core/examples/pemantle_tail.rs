//! Tail of the total progeny on the critical walk, with the compensator
//! `n log²n P(Z > n)` next to its limiting constant.
//!
//!     cargo run --release --example pemantle_tail [trials] [seed]

use krillwalk::engine::{Limits, Runner, Simulator};
use krillwalk::lab::{z_tail, Experiment};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map_or(1_000_000, |a| a.parse().expect("trials"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let sim = Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), Limits::default()).unwrap();
    let exp = Experiment::new(sim, Runner::new(0).unwrap(), seed);
    let thresholds: Vec<u64> = (0..=10).map(|i| 10f64.powf(2.0 + 0.2 * i as f64).round() as u64).collect();
    let t = z_tail(&exp, trials, &thresholds).unwrap();

    let p = (2.0 - 3f64.sqrt()) / 4.0;
    let c = (1.0 / (4.0 * p)).ln() / (4.0 * p);
    println!("{:>8} {:>8} {:>12} {:>10} {:>12}", "n", "hits", "P(Z>n)", "SE", "compensator");
    for r in &t.rows {
        println!(
            "{:>8} {:>8} {:>12.4e} {:>10.2e} {:>12.3}",
            r.threshold, r.hits, r.estimate, r.standard_error, r.compensator
        );
    }
    println!("slope over [1e2, 1e4]: {:?}; limit constant {c:.4}", t.log_slope(100, 10_000));
}
