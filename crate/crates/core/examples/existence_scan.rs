//! Counting zeros of the transformation function: one scan per branch.

use itm::existence::{linear_grid, scan_gamma};
use itm::ode::Tolerances;
use itm::problems::sakiadis;
use itm::scaling::Sign;

fn main() {
    let tol = Tolerances::default();
    for (sign, lo) in [(Sign::Plus, 0.5), (Sign::Minus, 1.0)] {
        let report = scan_gamma(&sakiadis(sign), &linear_grid(lo, 10.0, 50), &tol).expect("scan");
        let sentinels = report.samples.iter().filter(|s| !s.is_ok()).count();
        println!(
            "sakiadis branch {sign}: {} ({sentinels} blowup sentinels)",
            report.verdict
        );
        for b in &report.brackets {
            println!("  root in [{:.4}, {:.4}]", b.lo, b.hi);
        }
        for s in &report.sensitivity {
            println!("  dGamma/dh* ~ {:.4} near {:.4}", s.slope, s.root_estimate);
        }
    }
}
