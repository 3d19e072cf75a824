//! Sakiadis flow over a moving plate: secant iteration on Γ(h*) and the
//! rescaled velocity profile.

use itm::itm::{solve, RootCriteria};
use itm::ode::Tolerances;
use itm::problems::sakiadis;
use itm::scaling::Sign;

fn main() {
    let p = sakiadis(Sign::Minus);
    let sol = solve(
        &p,
        2.5,
        3.5,
        &RootCriteria::sakiadis(),
        &Tolerances::default(),
    )
    .expect("solve");

    println!(
        "{:>2} {:>10} {:>10} {:>13} {:>10}",
        "j", "h*", "lambda", "Gamma", "f''(0)"
    );
    for r in &sol.iterations {
        println!(
            "{:>2} {:>10.6} {:>10.6} {:>13.6e} {:>10.6}",
            r.j,
            r.h_star,
            r.lambda.unwrap_or(f64::NAN),
            r.gamma,
            r.missing_ic.unwrap_or(f64::NAN)
        );
    }

    println!("\n{:>8} {:>10} {:>10}", "eta", "f", "f'");
    for pt in sol.profile.points.iter().step_by(20) {
        println!("{:>8.3} {:>10.6} {:>10.6}", pt.x, pt.u, pt.du);
    }
}
