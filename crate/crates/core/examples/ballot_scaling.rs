//! Ratio diagnostics for the ballot-type path probabilities: the exact DP
//! value divided by its order-of-magnitude formula, across horizons.
//!
//!     cargo run --release --example ballot_scaling

use krillwalk::model::{find_lambda_star, tilt, StepLaw};
use krillwalk::pathlaw::{
    ballot_asymptotic, path_probability, BallotKind, BarrierProfile, PathQuery,
    TerminalCondition, DEFAULT_BALLOT_RANGE,
};

fn dp(step: &StepLaw, profile: BarrierProfile, k: i64) -> f64 {
    let q = PathQuery::new(step.clone(), profile, TerminalCondition::Equals(k));
    path_probability(&q).expect("dp").value()
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

fn main() {
    // zero-drift walk: the Pemantle law tilted at its root
    let pemantle = StepLaw::pemantle();
    let star = find_lambda_star(&pemantle).unwrap();
    let walk = tilt(&pemantle, star.lambda_star).unwrap().law().clone();
    let c = DEFAULT_BALLOT_RANGE;
    let grid = [400usize, 1600, 6400];

    println!("{:>6} {:>4} {:>14} {:>14} {:>14} {:>10}", "n", "k", "mean0 m=0", "mean0 m=√n/2", "fnk", "gnk/fnk");
    let (mut r0, mut r1, mut rf, mut gamma) = (vec![], vec![], vec![], vec![]);
    for &n in &grid {
        let k = (n as f64).sqrt().floor() as i64;
        let half = k / 2;
        let a0 = dp(&walk, BarrierProfile::one_sided(n, 0), k)
            / ballot_asymptotic(BallotKind::Mean0, n, k, 0, c).unwrap();
        let a1 = dp(&walk, BarrierProfile::one_sided(n, half), k)
            / ballot_asymptotic(BallotKind::Mean0, n, k, half, c).unwrap();
        let fnk = dp(&walk, BarrierProfile::below_target(n, k), k);
        let useful = dp(&walk, BarrierProfile::useful(n, k, 64), k);
        let af = fnk / ballot_asymptotic(BallotKind::Fnk, n, k, 0, c).unwrap();
        println!("{n:>6} {k:>4} {a0:>14.6} {a1:>14.6} {af:>14.6} {:>10.6}", useful / fnk);
        r0.push(a0);
        r1.push(a1);
        rf.push(af);
        gamma.push(useful / fnk);
    }
    println!(
        "max/min: mean0(m=0) {:.4}, mean0(m=√n/2) {:.4}, fnk {:.4}; min gnk/fnk {:.4}",
        spread(&r0),
        spread(&r1),
        spread(&rf),
        gamma.iter().cloned().fold(f64::MAX, f64::min)
    );

    // pinned midpoint: the ±1 walk only reaches even heights at even times,
    // so use an aperiodic walk with the same unit variance
    let unit: StepLaw = "-2:1/16,-1:1/4,0:3/8,1:1/4,2:1/16".parse().unwrap();
    let (n, k, m) = (1600usize, 40i64, 400usize);
    let mut pinned = vec![];
    for j in 1..=20 {
        let profile = BarrierProfile::unconstrained(n)
            .with_interior(Some(0), Some(k))
            .with_pin(m, j);
        let value = dp(&unit, profile, k);
        let formula =
            ballot_asymptotic(BallotKind::Pinned { j }, n, k, m as i64, c).unwrap();
        pinned.push(value / formula);
    }
    println!("pinned midpoint ratios: {:?}", pinned.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>());
    println!("pinned max/min {:.4}", spread(&pinned));
}
