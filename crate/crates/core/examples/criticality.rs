//! Classifies a few step/offspring pairs and prints the cumulant at its minimizer.
//!
//!     cargo run --release --example criticality

use krillwalk::model::{classify, cumulant, OffspringLaw, StepLaw};

fn show(name: &str, step: &StepLaw, offspring: &OffspringLaw) {
    let r = classify(step, offspring).expect("classify");
    let c = cumulant(step, r.lambda_star).unwrap();
    println!(
        "{name:<28} {:<14} λ* = {:.7}  f(λ*) = {:.10}  log EB = {:.10}  gap = {:+.2e}  Λ'' = {:.4}",
        r.verdict.to_string(),
        r.lambda_star,
        r.f_star,
        r.log_mean_offspring,
        r.gap(),
        c.curvature
    );
}

fn main() {
    let binary = OffspringLaw::constant(2);
    show("pemantle", &StepLaw::pemantle(), &binary);

    // seven decimals shift the gap by about 1e-8
    let rounded: StepLaw = "-1:0.9330127,1:0.0669873".parse().unwrap();
    show("pemantle, 7 decimals", &rounded, &binary);

    show("p = 0.05", &StepLaw::plus_minus_one(0.05).unwrap(), &binary);
    show("p = 0.1", &StepLaw::plus_minus_one(0.1).unwrap(), &binary);

    let poisson = OffspringLaw::poisson(1.5).unwrap();
    let calibrated = StepLaw::critical_plus_minus_one(poisson.mean()).unwrap();
    show("calibrated, Poisson(1.5)", &calibrated, &poisson);

    let lazy: StepLaw = "-2:0.5,-1:0.3,0:0.15,3:0.05".parse().unwrap();
    show("lazy skewed walk", &lazy, &OffspringLaw::poisson(2.5).unwrap());
}
