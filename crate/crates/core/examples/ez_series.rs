//! The series for E[Z] from level means, with its power-law completion.
//!
//!     cargo run --release --example ez_series [N]

use krillwalk::lab::{ez_series, fit_exponent};
use krillwalk::model::{OffspringLaw, StepLaw};

fn main() {
    let n: usize = std::env::args().nth(1).map_or(5000, |a| a.parse().expect("N"));
    let r = ez_series(&StepLaw::pemantle(), &OffspringLaw::constant(2), n).unwrap();
    for m in [10usize, 100, 1000, n] {
        if m <= n {
            println!("n = {m:>5}: term {:.3e}, partial sum {:.7}", r.terms[m], r.partial_sums[m]);
        }
    }
    println!("fitted exponent {:?}, over [200, 2000] {:?}", r.fitted_exponent, fit_exponent(&r.terms, 200, 2000.min(n)));
    println!(
        "tail constant {:.4}, completion {:.5} ± {:.1e}, total {:.7}",
        r.tail_constant, r.tail_completion, r.completion_uncertainty, r.total
    );
}
