//! The adaptive Dormand-Prince integrator on its own: a pendulum, dense
//! output, and a blowup report.

use itm::ode::{integrate, FnSystem, IntegrationStatus, Sampling, Tolerances};

fn main() {
    let pendulum = FnSystem::new(2, |_t: f64, y: &[f64], d: &mut [f64]| {
        d[0] = y[1];
        d[1] = -y[0].sin();
    });
    let tol = Tolerances::uniform(1e-9);
    let out = integrate(
        &pendulum,
        &[1.0, 0.0],
        (0.0, 10.0),
        &tol,
        Sampling::Dense(10),
    )
    .unwrap();
    for (t, y) in out.samples.as_deref().unwrap_or_default() {
        let energy = 0.5 * y[1] * y[1] - y[0].cos();
        println!("t = {t:>5.2}  theta = {:>9.6}  E = {energy:.9}", y[0]);
    }
    println!("{} steps", out.steps_taken);

    let riccati = FnSystem::new(1, |_t: f64, y: &[f64], d: &mut [f64]| d[0] = y[0] * y[0]);
    let out = integrate(
        &riccati,
        &[1.0],
        (0.0, 2.0),
        &Tolerances::default(),
        Sampling::FinalOnly,
    )
    .unwrap();
    assert_eq!(out.status, IntegrationStatus::Blowup);
    println!("y' = y^2 from y(0) = 1: blowup near t = {:.4}", out.final_t);
}
