//! The iterative transformation method.
//!
//! For a trial `h*` the starred initial value problem is integrated up to
//! the truncated boundary, the group parameter λ is recovered from the
//! starred slope there, and `Γ(h*) = λ^{-σ} h* - 1` is formed. A root of Γ
//! corresponds to `h = 1`, i.e. to a solution of the original problem, which
//! is then recovered by rescaling the starred solution.
//!
//! When the starred problem cannot be integrated to the truncated boundary,
//! or no positive λ exists, the sample carries the sentinel value `Γ = -1`.
//! The secant driver tolerates a single sentinel; two in a row make the
//! secant denominator vanish and are reported as [`ItmError::DegenerateSecant`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{integrate, IntegrationStatus, OdeError, Sampling, Tolerances};
use crate::problems::ProblemSpec;
use crate::scaling::{
    compute_gamma, compute_lambda, physical_missing_ic, rescale_profile, starred_initial_state,
    ProfilePoint, RescaledProfile, ScalingError, Sign,
};

/// Number of points in the rescaled profile returned by [`solve`].
pub const PROFILE_POINTS: usize = 201;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ItmError {
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("integrator step budget exhausted at h* = {h_star}")]
    StepBudgetExhausted { h_star: f64 },
    #[error("secant denominator vanished at iterate {iterate} (h* = {h_star})")]
    DegenerateSecant {
        iterate: usize,
        h_star: f64,
        trace: Vec<GammaSample>,
    },
    #[error("Γ evaluation failed at iterate {iterate} (h* = {h_star}): {source}")]
    EvaluationFailed {
        iterate: usize,
        h_star: f64,
        trace: Vec<GammaSample>,
        source: Box<ItmError>,
    },
    #[error("initial iterates must be positive and distinct, got {h0} and {h1}")]
    InvalidIterates { h0: f64, h1: f64 },
    #[error("invalid bracket ({lo}, {hi}): {reason}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        reason: &'static str,
    },
    #[error("bisection hit a blow-up sentinel at h* = {0}")]
    SentinelInBracket(f64),
    #[error("invalid root criteria: {0}")]
    InvalidCriteria(&'static str),
    #[error("no iterate produced a valid Γ sample")]
    NoValidIterate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleStatus {
    Ok,
    BlowupSentinel,
}

/// One evaluation of the transformation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSample {
    pub h_star: f64,
    pub gamma: f64,
    pub lambda: Option<f64>,
    /// Starred slope at the truncated boundary, or at the point where
    /// integration stopped for sentinel samples.
    pub v_star_inf: f64,
    pub status: SampleStatus,
    pub integrator_steps: usize,
}

impl GammaSample {
    pub fn is_ok(&self) -> bool {
        self.status == SampleStatus::Ok
    }

    fn sentinel(h_star: f64, v_star_inf: f64, integrator_steps: usize) -> Self {
        Self {
            h_star,
            gamma: -1.0,
            lambda: None,
            v_star_inf,
            status: SampleStatus::BlowupSentinel,
            integrator_steps,
        }
    }
}

/// Termination criteria for the root finders:
/// `|Γ(h*_j)| <= tol_gamma` and `|h*_j - h*_{j-1}| <= tol_rel |h*_j| + tol_abs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCriteria {
    pub tol_gamma: f64,
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub max_iters: usize,
}

impl Default for RootCriteria {
    fn default() -> Self {
        Self {
            tol_gamma: 1e-6,
            tol_rel: 1e-6,
            tol_abs: 1e-6,
            max_iters: 50,
        }
    }
}

impl RootCriteria {
    /// Criteria used for the Sakiadis runs: `|Γ| <= 1e-9`.
    pub fn sakiadis() -> Self {
        Self {
            tol_gamma: 1e-9,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ItmError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.tol_gamma) || !positive(self.tol_rel) || !positive(self.tol_abs) {
            return Err(ItmError::InvalidCriteria("tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(ItmError::InvalidCriteria("max_iters must be positive"));
        }
        Ok(())
    }

    fn step_small(&self, h: f64, h_prev: f64) -> bool {
        (h - h_prev).abs() <= self.tol_rel * h.abs() + self.tol_abs
    }
}

/// Evaluates `Γ(h*)` by integrating the starred problem on
/// `[0, truncated_boundary]`.
pub fn evaluate_gamma(
    p: &ProblemSpec,
    h_star: f64,
    tol: &Tolerances,
) -> Result<GammaSample, ItmError> {
    let y0 = starred_initial_state(&p.boundary, &p.group, h_star, p.missing_ic_sign)?;
    let system = p.starred_rhs(h_star);
    let out = integrate(
        &system,
        &y0,
        (0.0, p.truncated_boundary),
        tol,
        Sampling::FinalOnly,
    )?;
    let v_star = out.final_state[1];
    match out.status {
        IntegrationStatus::Completed => {}
        IntegrationStatus::Blowup | IntegrationStatus::StepUnderflow => {
            return Ok(GammaSample::sentinel(h_star, v_star, out.steps_taken));
        }
        IntegrationStatus::MaxStepsExceeded => {
            return Err(ItmError::StepBudgetExhausted { h_star });
        }
    }
    let lambda = match compute_lambda(v_star, h_star, &p.group, &p.boundary) {
        Ok(l) => l,
        Err(ScalingError::NoPositiveLambda { .. }) => {
            return Ok(GammaSample::sentinel(h_star, v_star, out.steps_taken));
        }
        Err(e) => return Err(e.into()),
    };
    let gamma = compute_gamma(lambda, h_star, p.group.sigma())?;
    // λ so large that Γ rounds to -1 carries no more information than a blowup.
    if gamma <= -1.0 {
        return Ok(GammaSample::sentinel(h_star, v_star, out.steps_taken));
    }
    Ok(GammaSample {
        h_star,
        gamma,
        lambda: Some(lambda),
        v_star_inf: v_star,
        status: SampleStatus::Ok,
        integrator_steps: out.steps_taken,
    })
}

/// Result of a root search over `h*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSearch {
    /// Last sample evaluated.
    pub root: GammaSample,
    /// Every sample in evaluation order, starting with the initial iterates.
    pub trace: Vec<GammaSample>,
    pub converged: bool,
}

impl RootSearch {
    /// Index of the last iterate, matching the `j` column of the iteration
    /// tables (initial iterates are `j = 0, 1`).
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

/// Secant iteration `h_{j+1} = h_j - Γ_j (h_j - h_{j-1}) / (Γ_j - Γ_{j-1})`.
///
/// Stops when both conditions of [`RootCriteria`] hold at an `Ok` sample, or
/// when the iterate index reaches `max_iters`. An iterate at or below zero is
/// replaced by half the previous iterate. Errors from `gamma_fn` after the
/// initial iterates come back as [`ItmError::EvaluationFailed`] carrying the
/// trace so far.
pub fn secant_solve<F>(
    mut gamma_fn: F,
    h0: f64,
    h1: f64,
    crit: &RootCriteria,
) -> Result<RootSearch, ItmError>
where
    F: FnMut(f64) -> Result<GammaSample, ItmError>,
{
    crit.validate()?;
    if !(h0 > 0.0 && h1 > 0.0 && h0.is_finite() && h1.is_finite()) || h0 == h1 {
        return Err(ItmError::InvalidIterates { h0, h1 });
    }
    let mut trace = vec![gamma_fn(h0)?, gamma_fn(h1)?];
    loop {
        let j = trace.len() - 1;
        let (prev, curr) = (trace[j - 1], trace[j]);
        if curr.is_ok()
            && curr.gamma.abs() <= crit.tol_gamma
            && crit.step_small(curr.h_star, prev.h_star)
        {
            return Ok(RootSearch {
                root: curr,
                trace,
                converged: true,
            });
        }
        if j >= crit.max_iters {
            return Ok(RootSearch {
                root: curr,
                trace,
                converged: false,
            });
        }
        let denom = curr.gamma - prev.gamma;
        let mut next = curr.h_star - curr.gamma * (curr.h_star - prev.h_star) / denom;
        if denom == 0.0 || !next.is_finite() {
            return Err(ItmError::DegenerateSecant {
                iterate: j,
                h_star: curr.h_star,
                trace,
            });
        }
        if next <= 0.0 {
            next = 0.5 * curr.h_star;
        }
        match gamma_fn(next) {
            Ok(sample) => trace.push(sample),
            Err(e) => {
                return Err(ItmError::EvaluationFailed {
                    iterate: j + 1,
                    h_star: next,
                    trace,
                    source: Box::new(e),
                })
            }
        }
    }
}

/// Bisection on a sign-change bracket of `Ok` samples.
pub fn bisection_solve<F>(
    mut gamma_fn: F,
    bracket: (f64, f64),
    crit: &RootCriteria,
) -> Result<RootSearch, ItmError>
where
    F: FnMut(f64) -> Result<GammaSample, ItmError>,
{
    crit.validate()?;
    let (mut lo, mut hi) = bracket;
    let invalid = |reason| ItmError::InvalidBracket {
        lo: bracket.0,
        hi: bracket.1,
        reason,
    };
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(invalid("endpoints must satisfy 0 < lo < hi"));
    }
    let s_lo = gamma_fn(lo)?;
    let s_hi = gamma_fn(hi)?;
    if !s_lo.is_ok() || !s_hi.is_ok() {
        return Err(invalid("an endpoint is a blow-up sentinel"));
    }
    if !(s_lo.gamma * s_hi.gamma < 0.0) {
        return Err(invalid("Γ does not change sign"));
    }
    let lo_positive = s_lo.gamma > 0.0;
    let mut trace = vec![s_lo, s_hi];
    for _ in 0..crit.max_iters {
        let mid = 0.5 * (lo + hi);
        let s = gamma_fn(mid)?;
        trace.push(s);
        if !s.is_ok() {
            return Err(ItmError::SentinelInBracket(mid));
        }
        if (s.gamma > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if s.gamma.abs() <= crit.tol_gamma || hi - lo <= crit.tol_rel * mid.abs() + crit.tol_abs {
            return Ok(RootSearch {
                root: s,
                trace,
                converged: true,
            });
        }
    }
    let root = *trace.last().expect("trace holds the endpoints");
    Ok(RootSearch {
        root,
        trace,
        converged: false,
    })
}

/// One row of the iteration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub j: usize,
    pub h_star: f64,
    pub lambda: Option<f64>,
    pub gamma: f64,
    /// Physical `u''(0)` implied by this iterate's λ.
    pub missing_ic: Option<f64>,
    pub status: SampleStatus,
}

/// How a secant run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
    DegenerateSecant,
    EvaluationFailed,
}

impl Termination {
    pub fn reason_code(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max-iterations",
            Termination::DegenerateSecant => "degenerate-secant",
            Termination::EvaluationFailed => "evaluation-failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItmSolution {
    pub problem: String,
    pub sign: Sign,
    pub h_star_root: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// Physical `u''(0)`.
    pub missing_ic: f64,
    /// Empty unless the iteration converged.
    pub profile: RescaledProfile,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub termination: Termination,
}

impl ItmSolution {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    /// Non-converged report for a secant run that ended in an error.
    ///
    /// Returns `None` for errors that carry no trace, or when no iterate of
    /// the trace produced a valid λ.
    pub fn from_failure(p: &ProblemSpec, err: &ItmError) -> Option<Self> {
        let (trace, termination) = match err {
            ItmError::DegenerateSecant { trace, .. } => (trace, Termination::DegenerateSecant),
            ItmError::EvaluationFailed { trace, .. } => (trace, Termination::EvaluationFailed),
            _ => return None,
        };
        summarize(p, trace, None, termination).ok()
    }
}

fn summarize(
    p: &ProblemSpec,
    trace: &[GammaSample],
    profile: Option<RescaledProfile>,
    termination: Termination,
) -> Result<ItmSolution, ItmError> {
    let converged = termination == Termination::Converged;
    let best = if converged {
        *trace.last().ok_or(ItmError::NoValidIterate)?
    } else {
        *trace
            .iter()
            .rev()
            .find(|s| s.is_ok())
            .ok_or(ItmError::NoValidIterate)?
    };
    let lambda = best.lambda.ok_or(ItmError::NoValidIterate)?;
    Ok(ItmSolution {
        problem: p.name.clone(),
        sign: p.missing_ic_sign,
        h_star_root: best.h_star,
        lambda,
        gamma: best.gamma,
        missing_ic: physical_missing_ic(p.missing_ic_sign, lambda, &p.group),
        profile: profile.unwrap_or_default(),
        iterations: iteration_records(p, trace),
        converged,
        termination,
    })
}

fn iteration_records(p: &ProblemSpec, trace: &[GammaSample]) -> Vec<IterationRecord> {
    trace
        .iter()
        .enumerate()
        .map(|(j, s)| IterationRecord {
            j,
            h_star: s.h_star,
            lambda: s.lambda,
            gamma: s.gamma,
            missing_ic: s
                .lambda
                .map(|l| physical_missing_ic(p.missing_ic_sign, l, &p.group)),
            status: s.status,
        })
        .collect()
}

/// Integrates the starred problem at `h_star` on a dense grid and rescales
/// it with `lambda`.
pub fn rescaled_solution(
    p: &ProblemSpec,
    h_star: f64,
    lambda: f64,
    tol: &Tolerances,
    points: usize,
) -> Result<RescaledProfile, ItmError> {
    let y0 = starred_initial_state(&p.boundary, &p.group, h_star, p.missing_ic_sign)?;
    let out = integrate(
        &p.starred_rhs(h_star),
        &y0,
        (0.0, p.truncated_boundary),
        tol,
        Sampling::Dense(points),
    )?;
    let starred: Vec<ProfilePoint> = out
        .samples
        .unwrap_or_default()
        .into_iter()
        .map(|(x, y)| ProfilePoint {
            x,
            u: y[0],
            du: y[1],
            d2u: y[2],
        })
        .collect();
    Ok(rescale_profile(&starred, lambda, &p.group)?)
}

/// Runs the secant iteration from `(h0, h1)` and, on convergence, rescales
/// the starred solution at the root to physical variables.
pub fn solve(
    p: &ProblemSpec,
    h0: f64,
    h1: f64,
    crit: &RootCriteria,
    tol: &Tolerances,
) -> Result<ItmSolution, ItmError> {
    let search = secant_solve(|h| evaluate_gamma(p, h, tol), h0, h1, crit)?;
    if !search.converged {
        return summarize(p, &search.trace, None, Termination::MaxIterations);
    }
    let root = search.root;
    let lambda = root.lambda.ok_or(ItmError::NoValidIterate)?;
    let profile = rescaled_solution(p, root.h_star, lambda, tol, PROFILE_POINTS)?;
    summarize(p, &search.trace, Some(profile), Termination::Converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{falkner_skan, sakiadis};

    fn affine(h: f64) -> Result<GammaSample, ItmError> {
        Ok(GammaSample {
            h_star: h,
            gamma: 2.0 * (h - 1.0),
            lambda: Some(1.0),
            v_star_inf: 0.0,
            status: SampleStatus::Ok,
            integrator_steps: 0,
        })
    }

    #[test]
    fn secant_is_exact_on_affine_functions() {
        let out = secant_solve(affine, 0.5, 2.0, &RootCriteria::default()).unwrap();
        assert!(out.converged);
        assert!(out.iterations() <= 3);
        assert!((out.root.h_star - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_on_affine_function() {
        let crit = RootCriteria {
            tol_gamma: 1e-10,
            tol_rel: 1e-10,
            tol_abs: 1e-10,
            max_iters: 100,
        };
        let out = bisection_solve(affine, (0.5, 2.0), &crit).unwrap();
        assert!(out.converged);
        assert!((out.root.h_star - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bisection_rejects_bad_brackets() {
        let crit = RootCriteria::default();
        assert!(matches!(
            bisection_solve(affine, (2.0, 3.0), &crit),
            Err(ItmError::InvalidBracket { .. })
        ));
        assert!(matches!(
            bisection_solve(affine, (2.0, 0.5), &crit),
            Err(ItmError::InvalidBracket { .. })
        ));
    }

    #[test]
    fn secant_rejects_bad_iterates() {
        let crit = RootCriteria::default();
        assert!(secant_solve(affine, 1.0, 1.0, &crit).is_err());
        assert!(secant_solve(affine, -1.0, 1.0, &crit).is_err());
    }

    fn with_sentinels(
        sentinel: impl Fn(f64) -> bool,
    ) -> impl FnMut(f64) -> Result<GammaSample, ItmError> {
        move |h| {
            if sentinel(h) {
                Ok(GammaSample::sentinel(h, 0.0, 0))
            } else {
                affine(h)
            }
        }
    }

    #[test]
    fn one_sentinel_is_survived() {
        // The first iterate is forced to the sentinel.
        let out = secant_solve(
            with_sentinels(|h| h == 3.0),
            3.0,
            2.5,
            &RootCriteria::default(),
        )
        .unwrap();
        assert!(out.converged);
        assert_eq!(out.trace[0].status, SampleStatus::BlowupSentinel);
        assert!((out.root.h_star - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_consecutive_sentinels_are_degenerate() {
        let err = secant_solve(
            with_sentinels(|h| h > 2.0),
            3.0,
            4.0,
            &RootCriteria::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ItmError::DegenerateSecant { iterate: 1, .. }));
    }

    #[test]
    fn negative_iterates_are_clamped() {
        // Γ = h - 1 from (5, 4) with a fake Γ(5) pushes the secant below zero.
        let f = |h: f64| {
            let mut s = affine(h)?;
            if h == 5.0 {
                s.gamma = 6.5;
            }
            Ok(s)
        };
        let out = secant_solve(f, 5.0, 4.0, &RootCriteria::default()).unwrap();
        assert_eq!(out.trace[2].h_star, 2.0);
        assert!(out.converged);
    }

    #[test]
    fn iteration_budget_reports_non_convergence() {
        let slow = |h: f64| {
            let mut s = affine(h)?;
            s.gamma = (h - 1.0).powi(3) + 1e-3 * (h - 1.0);
            Ok(s)
        };
        let crit = RootCriteria {
            max_iters: 3,
            ..RootCriteria::default()
        };
        let out = secant_solve(slow, 3.0, 2.5, &crit).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations(), 3);
    }

    #[test]
    fn sakiadis_gamma_matches_first_iterates() {
        let tol = Tolerances::default();
        let s0 = evaluate_gamma(&sakiadis(Sign::Minus), 2.5, &tol).unwrap();
        assert!((s0.gamma - 0.967343).abs() < 2e-3, "{s0:?}");
        let s1 = evaluate_gamma(&sakiadis(Sign::Minus), 3.5, &tol).unwrap();
        assert!((s1.gamma + 0.261541).abs() < 2e-3, "{s1:?}");
    }

    #[test]
    fn sakiadis_solution() {
        let sol = solve(
            &sakiadis(Sign::Minus),
            2.5,
            3.5,
            &RootCriteria::sakiadis(),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(sol.converged);
        assert!((sol.h_star_root - 2.954391).abs() < 1e-4);
        assert!((sol.missing_ic + 0.443761).abs() < 1e-4);
        let first = sol.profile.points[0];
        assert!(first.u.abs() < 1e-12 && (first.du - 1.0).abs() < 1e-6);
        assert!(sol.profile.points.last().unwrap().du.abs() < 1e-3);
    }

    #[test]
    fn rejects_nonpositive_h_star() {
        assert!(evaluate_gamma(
            &falkner_skan(-0.01, Sign::Plus),
            0.0,
            &Tolerances::default()
        )
        .is_err());
    }

    #[test]
    fn reverse_flow_sample() {
        let s = evaluate_gamma(
            &falkner_skan(-0.01, Sign::Minus),
            150.0,
            &Tolerances::default(),
        )
        .unwrap();
        assert!((s.gamma - 5.263092).abs() < 5e-3, "{s:?}");
    }
}
