//! Continuation in β for the Falkner-Skan model.
//!
//! Each β is solved with initial iterates taken close to the root found for
//! the previous β. The same warm-started solve, used as a convergence
//! predicate, locates by bisection the smallest β for which a solution
//! exists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::itm::{solve, ItmError, ItmSolution, RootCriteria, Termination};
use crate::ode::Tolerances;
use crate::problems::falkner_skan;
use crate::scaling::Sign;

/// Multipliers applied to the previous root to form warm-start iterates.
/// The first pair is the default; the others are retries.
pub const WARM_START_FACTORS: [(f64, f64); 3] = [(0.95, 1.05), (0.9, 1.2), (0.8, 1.5)];

/// Default β step for range sweeps.
pub const DEFAULT_BETA_STEP: f64 = 0.025;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("no β values to sweep")]
    EmptySweep,
    #[error("seed iterates failed at the first β = {beta}: {reason}")]
    SweepSeedFailure { beta: f64, reason: String },
    #[error("invalid β bracket ({lo}, {hi}): {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationEntry {
    pub beta: f64,
    pub branch: Sign,
    pub h_star_root: Option<f64>,
    pub missing_ic: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContinuationPath {
    /// Sorted by increasing β.
    pub entries: Vec<ContinuationEntry>,
}

impl ContinuationPath {
    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }

    pub fn entry(&self, beta: f64) -> Option<&ContinuationEntry> {
        self.entries.iter().find(|e| e.beta == beta)
    }

    fn push_sorted(&mut self, entry: ContinuationEntry) {
        let at = self.entries.partition_point(|e| e.beta <= entry.beta);
        self.entries.insert(at, entry);
    }
}

/// Outcome of one warm-started solve attempt sequence.
#[derive(Debug, Clone)]
enum Attempt {
    Converged(ItmSolution),
    Failed {
        iterations: usize,
        termination: Termination,
        reason: String,
    },
}

fn failed_entry(
    beta: f64,
    branch: Sign,
    iterations: usize,
    termination: Termination,
) -> ContinuationEntry {
    ContinuationEntry {
        beta,
        branch,
        h_star_root: None,
        missing_ic: None,
        iterations,
        converged: false,
        termination,
    }
}

fn converged_entry(beta: f64, sol: &ItmSolution) -> ContinuationEntry {
    ContinuationEntry {
        beta,
        branch: sol.sign,
        h_star_root: Some(sol.h_star_root),
        missing_ic: Some(sol.missing_ic),
        iterations: sol.iteration_count(),
        converged: true,
        termination: Termination::Converged,
    }
}

fn attempt(
    beta: f64,
    branch: Sign,
    iterates: &[(f64, f64)],
    crit: &RootCriteria,
    tol: &Tolerances,
) -> Attempt {
    let p = falkner_skan(beta, branch);
    let mut last = Attempt::Failed {
        iterations: 0,
        termination: Termination::EvaluationFailed,
        reason: "no initial iterates".into(),
    };
    for &(h0, h1) in iterates {
        last = match solve(&p, h0, h1, crit, tol) {
            Ok(sol) if sol.converged => return Attempt::Converged(sol),
            Ok(sol) => Attempt::Failed {
                iterations: sol.iteration_count(),
                termination: sol.termination,
                reason: format!(
                    "no convergence within {} iterations from ({h0}, {h1})",
                    crit.max_iters
                ),
            },
            Err(e) => {
                let (iterations, termination) = match &e {
                    ItmError::DegenerateSecant { trace, .. } => {
                        (trace.len().saturating_sub(1), Termination::DegenerateSecant)
                    }
                    ItmError::EvaluationFailed { iterate, .. } => {
                        (*iterate, Termination::EvaluationFailed)
                    }
                    _ => (0, Termination::EvaluationFailed),
                };
                Attempt::Failed {
                    iterations,
                    termination,
                    reason: format!("from ({h0}, {h1}): {e}"),
                }
            }
        };
    }
    last
}

fn warm_iterates(root: f64, retries: bool) -> Vec<(f64, f64)> {
    let n = if retries { WARM_START_FACTORS.len() } else { 1 };
    WARM_START_FACTORS[..n]
        .iter()
        .map(|(a, b)| (root * a, root * b))
        .collect()
}

/// Solves each β in order, warm-starting from the last converged root.
/// Failures are recorded and the sweep carries on; only a failure at the
/// first β is an error.
pub fn sweep_beta(
    beta_values: &[f64],
    branch: Sign,
    seed_iterates: (f64, f64),
    crit: &RootCriteria,
    tol: &Tolerances,
) -> Result<ContinuationPath, ContinuationError> {
    let (&first, rest) = beta_values
        .split_first()
        .ok_or(ContinuationError::EmptySweep)?;
    let mut path = ContinuationPath::default();
    let mut root = match attempt(first, branch, &[seed_iterates], crit, tol) {
        Attempt::Converged(sol) => {
            path.push_sorted(converged_entry(first, &sol));
            sol.h_star_root
        }
        Attempt::Failed { reason, .. } => {
            return Err(ContinuationError::SweepSeedFailure {
                beta: first,
                reason,
            })
        }
    };
    for &beta in rest {
        match attempt(beta, branch, &warm_iterates(root, false), crit, tol) {
            Attempt::Converged(sol) => {
                root = sol.h_star_root;
                path.push_sorted(converged_entry(beta, &sol));
            }
            Attempt::Failed {
                iterations,
                termination,
                ..
            } => {
                path.push_sorted(failed_entry(beta, branch, iterations, termination));
            }
        }
    }
    Ok(path)
}

fn median(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    match v.len() {
        0 => f64::INFINITY,
        n if n % 2 == 1 => v[n / 2] as f64,
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]) as f64,
    }
}

/// Sweeps β from `start` towards `end` with initial spacing `step`.
///
/// The spacing is halved whenever a solve needs more than twice the median
/// iteration count so far, and a failed β is retried with halved spacing
/// from the last converged point. Once the spacing drops below `step / 64`
/// the failure is recorded and the sweep stops.
pub fn sweep_beta_adaptive(
    start: f64,
    end: f64,
    step: f64,
    branch: Sign,
    seed_iterates: (f64, f64),
    crit: &RootCriteria,
    tol: &Tolerances,
) -> Result<ContinuationPath, ContinuationError> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && end.is_finite()) {
        return Err(ContinuationError::InvalidSweep(format!(
            "need finite endpoints and a positive step, got {start}, {end}, {step}"
        )));
    }
    let dir = if end >= start { 1.0 } else { -1.0 };
    let min_step = step / 64.0;
    let mut path = sweep_beta(&[start], branch, seed_iterates, crit, tol)?;
    let mut root = path.entries[0].h_star_root.expect("first entry converged");
    let mut iterations = vec![path.entries[0].iterations];
    let mut beta = start;
    let mut h = step;
    while dir * (end - beta) > 1e-12 * step {
        let next = if dir * (end - (beta + dir * h)) < 0.0 {
            end
        } else {
            beta + dir * h
        };
        match attempt(next, branch, &warm_iterates(root, false), crit, tol) {
            Attempt::Converged(sol) => {
                if sol.iteration_count() as f64 > 2.0 * median(&iterations) {
                    h *= 0.5;
                }
                iterations.push(sol.iteration_count());
                root = sol.h_star_root;
                beta = next;
                path.push_sorted(converged_entry(next, &sol));
            }
            Attempt::Failed {
                iterations: it,
                termination,
                ..
            } => {
                if h * 0.5 < min_step {
                    path.push_sorted(failed_entry(next, branch, it, termination));
                    break;
                }
                h *= 0.5;
            }
        }
    }
    Ok(path)
}

/// Inputs of the β_min search other than the bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaMinSettings {
    pub branch: Sign,
    /// Cold-start iterates for the upper end of the bracket.
    pub seed_iterates: (f64, f64),
    pub crit: RootCriteria,
    pub tol: Tolerances,
}

impl Default for BetaMinSettings {
    fn default() -> Self {
        Self {
            branch: Sign::Plus,
            seed_iterates: (1.0, 5.0),
            crit: RootCriteria::default(),
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaMinEstimate {
    pub beta_min: f64,
    pub bracket_width: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
    /// Failure at `beta_lo`.
    pub witness: String,
    /// Converged solution at `beta_hi`, the closest one to β_min.
    pub last_converged: ContinuationEntry,
}

/// Bisection on β with the predicate "the warm-started ITM converges".
///
/// The solve must converge at `hi` (from the seed iterates) and fail at `lo`
/// (warm-started from the root at `hi`, with every retry pair).
pub fn find_beta_min(
    settings: &BetaMinSettings,
    initial_bracket: (f64, f64),
    width_tol: f64,
) -> Result<BetaMinEstimate, ContinuationError> {
    let (mut lo, mut hi) = initial_bracket;
    let invalid = |reason: &str| ContinuationError::InvalidBracket {
        lo: initial_bracket.0,
        hi: initial_bracket.1,
        reason: reason.to_string(),
    };
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(invalid("need lo < hi"));
    }
    if !(width_tol > 0.0) {
        return Err(invalid("width tolerance must be positive"));
    }
    let BetaMinSettings {
        branch,
        seed_iterates,
        crit,
        tol,
    } = *settings;

    let mut best = match attempt(hi, branch, &[seed_iterates], &crit, &tol) {
        Attempt::Converged(sol) => sol,
        Attempt::Failed { reason, .. } => {
            return Err(invalid(&format!(
                "the solve fails at the upper end: {reason}"
            )))
        }
    };
    let mut witness = match attempt(
        lo,
        branch,
        &warm_iterates(best.h_star_root, true),
        &crit,
        &tol,
    ) {
        Attempt::Converged(_) => return Err(invalid("the solve converges at the lower end")),
        Attempt::Failed { reason, .. } => reason,
    };

    while hi - lo > width_tol {
        let mid = 0.5 * (lo + hi);
        match attempt(
            mid,
            branch,
            &warm_iterates(best.h_star_root, true),
            &crit,
            &tol,
        ) {
            Attempt::Converged(sol) => {
                hi = mid;
                best = sol;
            }
            Attempt::Failed { reason, .. } => {
                lo = mid;
                witness = reason;
            }
        }
    }

    Ok(BetaMinEstimate {
        beta_min: 0.5 * (lo + hi),
        bracket_width: hi - lo,
        beta_lo: lo,
        beta_hi: hi,
        witness,
        last_converged: converged_entry(hi, &best),
    })
}
