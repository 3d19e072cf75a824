//! Warm-started continuation in beta along the reverse-flow branch.

use itm::continuation::sweep_beta;
use itm::itm::RootCriteria;
use itm::ode::Tolerances;
use itm::scaling::Sign;

fn main() {
    let betas: Vec<f64> = (1..=8).map(|k| -0.025 * k as f64).collect();
    let path = sweep_beta(
        &betas,
        Sign::Minus,
        (15.0, 25.0),
        &RootCriteria::default(),
        &Tolerances::default(),
    )
    .expect("sweep");
    println!("{:>8} {:>12} {:>12} {:>6}", "beta", "h*", "f''(0)", "iters");
    for e in path.entries.iter().rev() {
        match (e.h_star_root, e.missing_ic) {
            (Some(h), Some(ic)) => {
                println!("{:>8.3} {h:>12.6} {ic:>12.6} {:>6}", e.beta, e.iterations)
            }
            _ => println!(
                "{:>8.3} {:>12} {:>12} {:>6}  ({})",
                e.beta,
                "-",
                "-",
                e.iterations,
                e.termination.reason_code()
            ),
        }
    }
}
