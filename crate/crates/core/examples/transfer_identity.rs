//! Computes one barrier probability directly and through the tilted walk.
//!
//!     cargo run --release --example transfer_identity

use krillwalk::model::{classify, OffspringLaw, StepLaw};
use krillwalk::pathlaw::{
    path_probability, tilted_path_probability, BarrierProfile, PathQuery, TerminalCondition,
};

fn main() {
    let step: StepLaw = "-1:0.6,0:0.25,1:0.1,2:0.05".parse().unwrap();
    let report = classify(&step, &OffspringLaw::constant(2)).unwrap();
    println!("λ* = {:.9}, f(λ*) = {:.9}", report.lambda_star, report.f_star);
    println!("{:>6} {:>4} {:>22} {:>22} {:>10}", "n", "k", "direct ln P", "tilted ln P", "rel gap");
    for n in [10usize, 100, 500, 2000] {
        let k = (n as f64).sqrt() as i64;
        let q = PathQuery::new(step.clone(), BarrierProfile::one_sided(n, 0), TerminalCondition::Equals(k));
        let direct = path_probability(&q).unwrap().probability.ln();
        let tilted = tilted_path_probability(&q, &report).unwrap().probability.ln();
        println!("{n:>6} {k:>4} {direct:>22.12} {tilted:>22.12} {:>10.2e}", (direct - tilted).exp_m1().abs());
    }
}
