//! The size-biased spine: survival of the spine against the exact walk
//! probability, and the off-spine maxima along a surviving spine.
//!
//!     cargo run --release --example spine

use krillwalk::engine::{Limits, RngContract, Simulator};
use krillwalk::model::{OffspringLaw, StepLaw};
use krillwalk::pathlaw::{path_probability, BarrierProfile, PathQuery, TerminalCondition};

fn main() {
    let step = StepLaw::pemantle();
    let sim = Simulator::new(step.clone(), OffspringLaw::constant(2), Limits::default()).unwrap();
    let trials = 1_000_000u64;
    for n in [1usize, 3, 5, 9] {
        let alive = (0..trials)
            .filter(|&i| {
                let mut rng = RngContract::new(11, i).generator();
                sim.simulate_spine(&mut rng, n, None).unwrap().spine_alive
            })
            .count();
        let q = PathQuery::new(step.clone(), BarrierProfile::one_sided(n, 0), TerminalCondition::AtLeast(0));
        let exact = path_probability(&q).unwrap().value();
        let est = alive as f64 / trials as f64;
        let se = (est * (1.0 - est) / trials as f64).sqrt();
        println!("P(spine stays >= 0 up to {n}): simulated {est:.4e} ± {se:.1e}, exact {exact:.4e}");
    }

    // first surviving spine with off-spine exploration
    for i in 0.. {
        let mut rng = RngContract::new(12, i).generator();
        let t = sim.simulate_spine(&mut rng, 9, Some(1_000_000)).unwrap();
        if !t.spine_alive {
            continue;
        }
        println!("trial {i}: spine {:?}", t.spine_positions);
        println!("off-spine counts {:?}", t.offspring_counts);
        println!("off-spine maxima {:?}", t.off_spine_max.unwrap());
        break;
    }
}
