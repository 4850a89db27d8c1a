//! Killed maximum against the maximum of the whole tree, on a subcritical walk
//! where pruning keeps the search small.
//!
//!     cargo run --release --example maxbar

use krillwalk::engine::{Limits, PruneConfig, RngContract, Simulator};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let sim = Simulator::new(StepLaw::plus_minus_one(0.02).unwrap(), OffspringLaw::constant(2), Limits::default())
        .unwrap();
    let prune = PruneConfig { eps: 1e-6, frontier_budget: 100_000 };
    let trials = 2_000u64;
    let (mut differ, mut over_budget, mut worst_bias) = (0u64, 0u64, 0.0f64);
    let mut highest = (0i64, 0i64);
    for i in 0..trials {
        let mut rng = RngContract::new(5, i).generator();
        let r = sim.simulate_maxbar(i, &mut rng, prune);
        differ += (r.m_all > r.m_living) as u64;
        over_budget += r.budget_exceeded as u64;
        worst_bias = worst_bias.max(r.prune_bias_bound.unwrap_or(f64::NAN));
        highest = (highest.0.max(r.m_living), highest.1.max(r.m_all));
    }
    println!("trials {trials}: M̄ > M in {differ}, budget exceeded {over_budget}");
    println!("largest M {}, largest M̄ {}, worst pruning bias bound {worst_bias:.2e}", highest.0, highest.1);
}
