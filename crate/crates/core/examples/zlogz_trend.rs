//! Prefix means of `Z log Z` on the critical walk and on a subcritical control.
//!
//!     cargo run --release --example zlogz_trend [seed]

use krillwalk::engine::{Limits, Runner, Simulator};
use krillwalk::lab::{strictly_increasing, zlogz_trend, Experiment};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(1, |a| a.parse().expect("seed"));
    let schedule = [10_000u64, 100_000, 1_000_000];
    for (name, step) in [("critical", StepLaw::pemantle()), ("p = 0.05", StepLaw::plus_minus_one(0.05).unwrap())] {
        let sim = Simulator::new(step, OffspringLaw::constant(2), Limits::default()).unwrap();
        let rows = zlogz_trend(&Experiment::new(sim, Runner::new(0).unwrap(), seed), &schedule).unwrap();
        let means: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.mean)).collect();
        println!("{name:<9} [{}] strictly increasing: {}", means.join(", "), strictly_increasing(&rows));
    }
}
