//! Normal and reverse flow for the Falkner-Skan model at beta = -0.01.

use itm::itm::{solve, RootCriteria};
use itm::ode::Tolerances;
use itm::problems::falkner_skan;
use itm::scaling::Sign;

fn main() {
    let crit = RootCriteria::default();
    let tol = Tolerances::default();
    for (sign, h0, h1) in [(Sign::Plus, 5.0, 10.0), (Sign::Minus, 75.0, 150.0)] {
        let sol = solve(&falkner_skan(-0.01, sign), h0, h1, &crit, &tol).expect("solve");
        println!(
            "branch {sign}: h* = {:.6}, f''(0) = {:.6}, {} iterations",
            sol.h_star_root,
            sol.missing_ic,
            sol.iteration_count()
        );
        let min_du = sol
            .profile
            .points
            .iter()
            .map(|p| p.du)
            .fold(f64::INFINITY, f64::min);
        println!("  min f' = {min_du:.6}");
    }
}
