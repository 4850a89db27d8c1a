//! Recomputes the frozen test constants: the point floor for the maximum and
//! the window floors for the max profile, both from one run of 10⁷ trials.
//!
//!     cargo run --release --example calibration [seed]

use krillwalk::engine::{Limits, Runner, Simulator};
use krillwalk::lab::{m_tail, max_profile, Experiment};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(1, |a| a.parse().expect("seed"));
    let trials = 10_000_000;
    let exp = || {
        let sim = Simulator::new(StepLaw::pemantle(), OffspringLaw::constant(2), Limits::default()).unwrap();
        Experiment::new(sim, Runner::new(0).unwrap(), seed)
    };
    let t = m_tail(&exp(), trials, 6).unwrap();
    let points: Vec<f64> = t.rows[1..=6].iter().map(|r| r.point_compensator.unwrap()).collect();
    let uppers: Vec<f64> = t.rows[1..=6].iter().map(|r| r.compensator).collect();
    let floor = points.iter().cloned().fold(f64::MAX, f64::min) / 2.0;
    println!("upper compensators k=1..6 {uppers:.3?}");
    println!("point compensators k=1..6 {points:.3?}; point floor {floor:.4}");

    let p = max_profile(&exp(), trials);
    let fractions: Vec<f64> = p.window.iter().filter(|w| (2..=5).contains(&w.k)).map(|w| w.fraction).collect();
    let floors: Vec<f64> = fractions.iter().map(|f| f / 2.0).collect();
    println!("window fractions k=2..5 {fractions:.3?}; floors {floors:.3?}");
}
