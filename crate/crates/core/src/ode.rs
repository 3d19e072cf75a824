//! Adaptive explicit Runge-Kutta integration for first-order systems.
//!
//! The stepper is the Dormand-Prince 5(4) embedded pair with local
//! extrapolation: the fifth-order solution is propagated and the
//! difference to the embedded fourth-order solution drives step control.
//! Integration stops early with [`IntegrationStatus::Blowup`] when a state
//! component exceeds the blow-up cap, which is how the starred initial value
//! problems report solutions that do not reach the truncated boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem {
    fn dimension(&self) -> usize;

    /// Writes `f(t, y)` into `dydt`. Both slices have length `dimension()`.
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

impl<S: OdeSystem + ?Sized> OdeSystem for &S {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (**self).rhs(t, y, dydt)
    }
}

/// An [`OdeSystem`] backed by a closure.
pub struct FnSystem<F> {
    dimension: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.f)(t, y, dydt)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("invalid interval [{t0}, {t1}]: the endpoint must exceed the start")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("initial state has length {got}, system dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(&'static str),
    #[error("dense sampling needs at least two points")]
    TooFewSamples,
}

/// Per-component error tolerances and run limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub blowup_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-6,
            max_steps: 1_000_000,
            blowup_cap: 1e10,
        }
    }
}

impl Tolerances {
    /// Same relative and absolute tolerance, default limits.
    pub fn uniform(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.rel_tol >= f64::EPSILON) {
            return Err(OdeError::InvalidTolerances(
                "rel_tol must be at least machine epsilon",
            ));
        }
        if !(self.abs_tol >= f64::EPSILON) {
            return Err(OdeError::InvalidTolerances(
                "abs_tol must be at least machine epsilon",
            ));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidTolerances("max_steps must be positive"));
        }
        if !(self.blowup_cap > 1.0) {
            return Err(OdeError::InvalidTolerances("blowup_cap must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegrationStatus {
    Completed,
    Blowup,
    StepUnderflow,
    MaxStepsExceeded,
}

/// Which states to record along the way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    FinalOnly,
    /// `n` equally spaced points including both endpoints. Steps are
    /// shortened to land on each point, so no interpolation is involved.
    Dense(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOutcome {
    pub status: IntegrationStatus,
    pub final_t: f64,
    pub final_state: Vec<f64>,
    pub samples: Option<Vec<(f64, Vec<f64>)>>,
    pub steps_taken: usize,
}

impl IntegrationOutcome {
    pub fn completed(&self) -> bool {
        self.status == IntegrationStatus::Completed
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Fifth-order minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const UNDERFLOW_FRACTION: f64 = 1e-14;

/// Stage storage for one Dormand-Prince step.
struct Stepper<'a, S: OdeSystem + ?Sized> {
    system: &'a S,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    fn new(system: &'a S) -> Self {
        let n = system.dimension();
        Self {
            system,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    /// Assumes `k[0]` holds `f(t, y)`. Fills `y_new` and `err` (unscaled
    /// error estimate); leaves `f(t + h, y_new)` in `k[6]`.
    fn step(&mut self, t: f64, y: &[f64], h: f64, y_new: &mut [f64], err: &mut [f64]) {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        self.system.rhs(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        self.system.rhs(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        self.system.rhs(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        self.system.rhs(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        self.system.rhs(t + h, tmp, k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        self.system.rhs(t + h, y_new, k7);
        for i in 0..n {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
    }

    fn accept(&mut self) {
        self.k.swap(0, 6);
    }
}

fn check_arguments<S: OdeSystem + ?Sized>(
    system: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
) -> Result<(), OdeError> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(OdeError::InvalidInterval { t0, t1 });
    }
    if y0.len() != system.dimension() {
        return Err(OdeError::DimensionMismatch {
            expected: system.dimension(),
            got: y0.len(),
        });
    }
    Ok(())
}

/// Integrates `system` from `interval.0` to `interval.1`.
///
/// Abnormal terminations (blow-up, step underflow, step budget) are reported
/// through the outcome status; only malformed arguments produce an `Err`.
pub fn integrate<S: OdeSystem + ?Sized>(
    system: &S,
    y0: &[f64],
    interval: (f64, f64),
    tol: &Tolerances,
    sampling: Sampling,
) -> Result<IntegrationOutcome, OdeError> {
    let (t0, t1) = interval;
    check_arguments(system, y0, t0, t1)?;
    tol.validate()?;
    if let Sampling::Dense(n) = sampling {
        if n < 2 {
            return Err(OdeError::TooFewSamples);
        }
    }

    let n = y0.len();
    let span = t1 - t0;
    let min_step = UNDERFLOW_FRACTION * span;
    let mut stepper = Stepper::new(system);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut t = t0;
    let mut h = span / 100.0;
    let mut steps_taken = 0usize;
    let mut attempts = 0usize;

    let (mut samples, output_times) = match sampling {
        Sampling::FinalOnly => (None, Vec::new()),
        Sampling::Dense(count) => {
            let times: Vec<f64> = (1..count)
                .map(|i| {
                    if i == count - 1 {
                        t1
                    } else {
                        t0 + span * i as f64 / (count - 1) as f64
                    }
                })
                .collect();
            (Some(vec![(t0, y.clone())]), times)
        }
    };
    let mut next_output = 0usize;

    let finish = |status, t, y: Vec<f64>, samples, steps_taken| IntegrationOutcome {
        status,
        final_t: t,
        final_state: y,
        samples,
        steps_taken,
    };

    system.rhs(t, &y, &mut stepper.k[0]);

    loop {
        let target = output_times.get(next_output).copied().unwrap_or(t1);
        let remaining = target - t;
        // Avoid leaving a sliver of interval shorter than rounding.
        let lands = h >= remaining || remaining - h <= 1e-12 * span;
        let step = if lands { remaining } else { h };

        if attempts >= tol.max_steps {
            return Ok(finish(
                IntegrationStatus::MaxStepsExceeded,
                t,
                y,
                samples,
                steps_taken,
            ));
        }
        attempts += 1;

        stepper.step(t, &y, step, &mut y_new, &mut err);

        let mut err_norm = 0.0f64;
        let mut finite = true;
        for i in 0..n {
            if !y_new[i].is_finite() || !err[i].is_finite() {
                finite = false;
                break;
            }
            let scale = tol.abs_tol + tol.rel_tol * y[i].abs().max(y_new[i].abs());
            err_norm = err_norm.max(err[i].abs() / scale);
        }
        if !finite {
            err_norm = f64::INFINITY;
        }

        let factor = if err_norm == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };

        if err_norm <= 1.0 {
            t = if lands { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            stepper.accept();
            steps_taken += 1;

            if lands && next_output < output_times.len() {
                if let Some(s) = samples.as_mut() {
                    s.push((t, y.clone()));
                }
                next_output += 1;
            }

            if y.iter().any(|v| v.abs() > tol.blowup_cap) {
                return Ok(finish(
                    IntegrationStatus::Blowup,
                    t,
                    y,
                    samples,
                    steps_taken,
                ));
            }
            if lands && target == t1 {
                return Ok(finish(
                    IntegrationStatus::Completed,
                    t1,
                    y,
                    samples,
                    steps_taken,
                ));
            }
            // A shortened landing step says nothing about the step size the
            // error estimate would support, so keep the previous proposal.
            if !lands || step >= h {
                h = step * factor;
            }
        } else {
            h = step * factor;
            if h < min_step {
                return Ok(finish(
                    IntegrationStatus::StepUnderflow,
                    t,
                    y,
                    samples,
                    steps_taken,
                ));
            }
        }
    }
}

/// Classical fixed-step integration with the fifth-order Dormand-Prince
/// weights and `n_steps` equal steps. Used to measure convergence order.
pub fn integrate_fixed<S: OdeSystem + ?Sized>(
    system: &S,
    y0: &[f64],
    interval: (f64, f64),
    n_steps: usize,
) -> Result<Vec<f64>, OdeError> {
    let (t0, t1) = interval;
    check_arguments(system, y0, t0, t1)?;
    if n_steps == 0 {
        return Err(OdeError::InvalidTolerances("n_steps must be positive"));
    }
    let h = (t1 - t0) / n_steps as f64;
    let mut stepper = Stepper::new(system);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; y.len()];
    let mut err = vec![0.0; y.len()];
    system.rhs(t0, &y, &mut stepper.k[0]);
    for i in 0..n_steps {
        let t = t0 + i as f64 * h;
        stepper.step(t, &y, h, &mut y_new, &mut err);
        std::mem::swap(&mut y, &mut y_new);
        stepper.accept();
    }
    Ok(y)
}
