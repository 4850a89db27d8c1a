//! Tail of the killed maximum, scaled by `e^{λ* k}`.
//!
//!     cargo run --release --example max_tail [trials] [seed]

use krillwalk::engine::{Limits, Runner, Simulator};
use krillwalk::lab::{m_tail, Experiment};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map_or(1_000_000, |a| a.parse().expect("trials"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let sim = Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), Limits::default()).unwrap();
    let exp = Experiment::new(sim, Runner::new(0).unwrap(), seed);
    let t = m_tail(&exp, trials, 6).unwrap();
    println!("{:>3} {:>12} {:>12} {:>14} {:>14}", "k", "P(M>=k)", "P(M=k)", "e^λk P(M>=k)", "k e^λk P(M=k)");
    for r in &t.rows {
        println!(
            "{:>3} {:>12.4e} {:>12.4e} {:>14.4} {:>14.4}",
            r.threshold,
            r.estimate,
            r.point_estimate.unwrap_or(f64::NAN),
            r.compensator,
            r.point_compensator.unwrap_or(f64::NAN)
        );
    }
}
