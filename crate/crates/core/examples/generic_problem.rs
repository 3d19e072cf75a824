//! A user-defined problem: u''' = -u u'' / 2 with u(0) = 0, u'(0) = 1,
//! u'(inf) = 0, embedded with the stretching group (delta, sigma) = (-1, 4).

use itm::existence::{log_grid, scan_gamma};
use itm::itm::{solve, RootCriteria};
use itm::ode::Tolerances;
use itm::problems::generic_third_order;
use itm::scaling::{BoundaryData, GroupSpec, Sign};

fn main() {
    let p = generic_third_order(
        |_x, u, _du, d2u| -0.5 * u * d2u,
        BoundaryData {
            u0: 0.0,
            v0: 1.0,
            v_inf: 0.0,
        },
        GroupSpec::new(-1.0, 4.0).unwrap(),
        10.0,
        Sign::Minus,
    )
    .unwrap();
    let tol = Tolerances::default();

    let scan = scan_gamma(&p, &log_grid(1.0, 100.0, 30), &tol).unwrap();
    println!("scan: {}", scan.verdict);
    let b = scan.brackets.first().expect("a sign change");
    let sol = solve(&p, b.lo, b.hi, &RootCriteria::default(), &tol).unwrap();
    println!(
        "u''(0) = {:.6} after {} iterations",
        sol.missing_ic,
        sol.iteration_count()
    );
}
