//! Where and how the killed maximum is first attained.
//!
//!     cargo run --release --example max_profile [trials] [seed]

use krillwalk::engine::{Limits, Runner, Simulator};
use krillwalk::lab::{max_profile, Experiment};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map_or(1_000_000, |a| a.parse().expect("trials"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let sim = Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), Limits::default()).unwrap();
    let p = max_profile(&Experiment::new(sim, Runner::new(0).unwrap(), seed), trials);
    println!("{:>3} {:>10} {:>10} {:>10} {:>9}", "k", "trials", "in window", "isolated", "fraction");
    for w in &p.window {
        println!(
            "{:>3} {:>10} {:>10} {:>10} {:>9.4}",
            w.k, w.trials_at_k, w.in_window, w.in_window_isolated, w.fraction
        );
    }
    println!("P(M = 3) ≈ {:.4e}; {} cells, {} censored", p.mass_at(3), p.cells.len(), p.truncated);
}
