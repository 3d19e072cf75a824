//! Smallest beta with a Falkner-Skan solution, by bisection on convergence.

use itm::continuation::{find_beta_min, BetaMinSettings};

fn main() {
    let width = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-4);
    let est = find_beta_min(&BetaMinSettings::default(), (-0.21, -0.19), width).expect("bracket");
    println!(
        "beta_min ~ {:.7} (bracket [{:.7}, {:.7}])",
        est.beta_min, est.beta_lo, est.beta_hi
    );
    println!(
        "f''(0) at beta_hi = {:.2e}",
        est.last_converged.missing_ic.unwrap_or(f64::NAN)
    );
    println!("below: {}", est.witness);
}
