//! Direct simulation of killed trees: sizes, maxima and depths.
//!
//!     cargo run --release --example killed_trees [trials] [seed]

use krillwalk::engine::{simulate_trials, Limits, Runner, Simulator};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map_or(100_000, |a| a.parse().expect("trials"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("seed"));
    let sim = Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), Limits::default()).unwrap();

    let (mut extinct_at_root, mut sum_z, mut biggest, mut deepest, mut highest, mut truncated) =
        (0u64, 0u128, 0u64, 0u32, 0i64, 0u64);
    simulate_trials(&sim, &Runner::new(0).unwrap(), seed, 0..trials, |r| {
        extinct_at_root += (r.z == 1) as u64;
        sum_z += r.z as u128;
        biggest = biggest.max(r.z);
        deepest = deepest.max(r.depth);
        highest = highest.max(r.m_living);
        truncated += r.truncated as u64;
    });
    println!("trials {trials}, seed {seed}");
    println!("P(Z = 1) ≈ {:.5}", extinct_at_root as f64 / trials as f64);
    println!("mean Z ≈ {:.4}", sum_z as f64 / trials as f64);
    println!("largest Z {biggest}, deepest generation {deepest}, highest M {highest}, censored {truncated}");
}
