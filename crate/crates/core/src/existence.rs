//! Numerical existence and uniqueness test.
//!
//! Solutions of the boundary value problem correspond one-to-one to the real
//! zeros of the transformation function Γ. Scanning Γ on a grid of `h*`
//! values and counting sign changes gives a lower bound on the number of
//! zeros, and hence on the number of solutions on the scanned branch.
//! Zeros of even multiplicity are invisible to a sign-change scan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::itm::{evaluate_gamma, GammaSample, ItmError};
use crate::ode::Tolerances;
use crate::problems::ProblemSpec;
use crate::scaling::Sign;

/// Fewest `Ok` samples needed before an empty scan counts as evidence of
/// nonexistence.
pub const MIN_SAMPLES_FOR_NONEXISTENCE: usize = 10;

/// Relative step of the central difference used by [`scan_gamma`].
pub const DEFAULT_REL_STEP: f64 = 1e-3;

/// `|dΓ/dh*|` above this counts as well conditioned: 1e3 unit roundoffs.
pub const WELL_CONDITIONED_THRESHOLD: f64 = 1e3 * (f64::EPSILON / 2.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("relative step {0} outside (1e-8, 1e-1)")]
    InvalidRelStep(f64),
    #[error("sensitivity undefined at h* = {0}: a probe hit the blow-up sentinel")]
    SensitivityUndefined(f64),
    #[error(transparent)]
    Evaluation(#[from] ItmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NoSolutionDetected,
    UniqueSolutionIndicated,
    MultipleSolutionsIndicated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::NoSolutionDetected => "no-solution-detected",
            Verdict::UniqueSolutionIndicated => "unique-solution-indicated",
            Verdict::MultipleSolutionsIndicated => "multiple-solutions-indicated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Consecutive grid points with `Ok` samples of opposite sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub root_estimate: f64,
    pub slope: f64,
    pub well_conditioned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub problem: String,
    pub sign: Sign,
    pub samples: Vec<GammaSample>,
    pub brackets: Vec<Bracket>,
    pub zero_count_lower_bound: usize,
    pub verdict: Verdict,
    /// One entry per bracket whose sensitivity probes stayed clear of the
    /// sentinel.
    pub sensitivity: Vec<Sensitivity>,
}

/// `count` equally spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// `count` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linear_grid(lo.ln(), hi.ln(), count)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if i == 0 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                v.exp()
            }
        })
        .collect()
}

fn validate_grid(grid: &[f64]) -> Result<(), ScanError> {
    if grid.len() < 2 {
        return Err(ScanError::InvalidGrid(format!(
            "need at least 2 points, got {}",
            grid.len()
        )));
    }
    if let Some(bad) = grid.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(ScanError::InvalidGrid(format!(
            "point {bad} is not positive"
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScanError::InvalidGrid(
            "points must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Sign-change brackets between consecutive `Ok` samples. A sentinel sample
/// breaks continuity, so no bracket spans one.
pub fn find_brackets(samples: &[GammaSample]) -> Vec<Bracket> {
    samples
        .windows(2)
        .filter(|w| w[0].is_ok() && w[1].is_ok())
        .filter(|w| (w[0].gamma < 0.0) != (w[1].gamma < 0.0))
        .map(|w| Bracket {
            lo: w[0].h_star,
            hi: w[1].h_star,
        })
        .collect()
}

/// Verdict from the bracket count and the coverage of `Ok` samples.
pub fn classify(report: &ScanReport) -> Verdict {
    match report.brackets.len() {
        1 => Verdict::UniqueSolutionIndicated,
        n if n >= 2 => Verdict::MultipleSolutionsIndicated,
        _ => {
            let ok: Vec<f64> = report
                .samples
                .iter()
                .filter(|s| s.is_ok())
                .map(|s| s.h_star)
                .collect();
            let spans_decade = match (ok.first(), ok.last()) {
                (Some(lo), Some(hi)) => hi / lo >= 10.0,
                _ => false,
            };
            if ok.len() >= MIN_SAMPLES_FOR_NONEXISTENCE && spans_decade {
                Verdict::NoSolutionDetected
            } else {
                Verdict::Inconclusive
            }
        }
    }
}

/// Central-difference estimate of `dΓ/dh*` at `root_estimate`.
pub fn sensitivity_at<F>(
    mut gamma_fn: F,
    root_estimate: f64,
    rel_step: f64,
) -> Result<Sensitivity, ScanError>
where
    F: FnMut(f64) -> Result<GammaSample, ItmError>,
{
    if !(rel_step > 1e-8 && rel_step < 1e-1) {
        return Err(ScanError::InvalidRelStep(rel_step));
    }
    let up = gamma_fn(root_estimate * (1.0 + rel_step))?;
    let down = gamma_fn(root_estimate * (1.0 - rel_step))?;
    if !up.is_ok() || !down.is_ok() {
        return Err(ScanError::SensitivityUndefined(root_estimate));
    }
    let slope = (up.gamma - down.gamma) / (2.0 * root_estimate * rel_step);
    Ok(Sensitivity {
        root_estimate,
        slope,
        well_conditioned: slope.abs() > WELL_CONDITIONED_THRESHOLD,
    })
}

/// Linear interpolation of the zero inside a bracket.
fn interpolate_root(samples: &[GammaSample], b: &Bracket) -> f64 {
    let find = |h| {
        samples
            .iter()
            .find(|s| s.h_star == h)
            .expect("bracket endpoint is a sample")
    };
    let (lo, hi) = (find(b.lo), find(b.hi));
    lo.h_star - lo.gamma * (hi.h_star - lo.h_star) / (hi.gamma - lo.gamma)
}

/// Evaluates Γ on every grid point (concurrently), brackets the sign changes
/// and classifies the result.
pub fn scan_gamma(
    p: &ProblemSpec,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<ScanReport, ScanError> {
    validate_grid(grid)?;
    let samples = grid
        .par_iter()
        .map(|&h| evaluate_gamma(p, h, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let brackets = find_brackets(&samples);
    let sensitivity = brackets
        .par_iter()
        .filter_map(|b| {
            let root = interpolate_root(&samples, b);
            sensitivity_at(|h| evaluate_gamma(p, h, tol), root, DEFAULT_REL_STEP).ok()
        })
        .collect();
    let mut report = ScanReport {
        problem: p.name.clone(),
        sign: p.missing_ic_sign,
        zero_count_lower_bound: brackets.len(),
        samples,
        brackets,
        verdict: Verdict::Inconclusive,
        sensitivity,
    };
    report.verdict = classify(&report);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itm::SampleStatus;
    use crate::problems::sakiadis;

    fn sample(h_star: f64, gamma: f64, ok: bool) -> GammaSample {
        GammaSample {
            h_star,
            gamma: if ok { gamma } else { -1.0 },
            lambda: ok.then_some(1.0),
            v_star_inf: 0.0,
            status: if ok {
                SampleStatus::Ok
            } else {
                SampleStatus::BlowupSentinel
            },
            integrator_steps: 0,
        }
    }

    fn report(samples: Vec<GammaSample>) -> ScanReport {
        let brackets = find_brackets(&samples);
        ScanReport {
            problem: "test".into(),
            sign: Sign::Plus,
            zero_count_lower_bound: brackets.len(),
            samples,
            brackets,
            verdict: Verdict::Inconclusive,
            sensitivity: vec![],
        }
    }

    #[test]
    fn grids() {
        assert_eq!(linear_grid(1.0, 3.0, 3), vec![1.0, 2.0, 3.0]);
        let g = log_grid(1.0, 100.0, 3);
        assert_eq!((g[0], g[2]), (1.0, 100.0));
        assert!((g[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        let p = sakiadis(Sign::Minus);
        let tol = Tolerances::default();
        assert!(matches!(
            scan_gamma(&p, &[], &tol),
            Err(ScanError::InvalidGrid(_))
        ));
        assert!(matches!(
            scan_gamma(&p, &[2.0], &tol),
            Err(ScanError::InvalidGrid(_))
        ));
        assert!(matches!(
            scan_gamma(&p, &[3.0, 2.0], &tol),
            Err(ScanError::InvalidGrid(_))
        ));
        assert!(matches!(
            scan_gamma(&p, &[-1.0, 2.0], &tol),
            Err(ScanError::InvalidGrid(_))
        ));
    }

    #[test]
    fn sentinels_break_brackets() {
        let s = vec![
            sample(1.0, 0.5, true),
            sample(2.0, 0.0, false),
            sample(3.0, -0.5, true),
        ];
        assert!(find_brackets(&s).is_empty());
        let s = vec![
            sample(1.0, 0.5, true),
            sample(2.0, -0.5, true),
            sample(3.0, 0.5, true),
        ];
        assert_eq!(
            find_brackets(&s),
            vec![Bracket { lo: 1.0, hi: 2.0 }, Bracket { lo: 2.0, hi: 3.0 }]
        );
    }

    #[test]
    fn verdicts() {
        let one = report(vec![sample(1.0, 0.5, true), sample(2.0, -0.5, true)]);
        assert_eq!(classify(&one), Verdict::UniqueSolutionIndicated);

        let two = report(vec![
            sample(1.0, 0.5, true),
            sample(2.0, -0.5, true),
            sample(3.0, 0.5, true),
        ]);
        assert_eq!(classify(&two), Verdict::MultipleSolutionsIndicated);

        let narrow = report((0..3).map(|i| sample(2.0 + i as f64, -0.5, true)).collect());
        assert_eq!(classify(&narrow), Verdict::Inconclusive);

        let wide = report(
            linear_grid(0.5, 10.0, 10)
                .into_iter()
                .map(|h| sample(h, -0.5, true))
                .collect(),
        );
        assert_eq!(classify(&wide), Verdict::NoSolutionDetected);

        let mut sparse: Vec<_> = linear_grid(0.5, 10.0, 10)
            .into_iter()
            .map(|h| sample(h, -0.5, true))
            .collect();
        sparse[0].status = SampleStatus::BlowupSentinel;
        assert_eq!(classify(&report(sparse)), Verdict::Inconclusive);
    }

    #[test]
    fn affine_slope() {
        let f = |h: f64| Ok(sample(h, h - 1.0, true));
        let s = sensitivity_at(f, 1.0, 1e-3).unwrap();
        assert!((s.slope - 1.0).abs() < 1e-12);
        assert!(s.well_conditioned);
        assert!(matches!(
            sensitivity_at(f, 1.0, 0.5),
            Err(ScanError::InvalidRelStep(_))
        ));
        let sentinel = |h: f64| Ok(sample(h, 0.0, h < 1.0));
        assert!(matches!(
            sensitivity_at(sentinel, 1.0, 1e-3),
            Err(ScanError::SensitivityUndefined(_))
        ));
    }

    #[test]
    fn flat_slope_is_ill_conditioned() {
        let s = sensitivity_at(|h| Ok(sample(h, 1e-20 * (h - 1.0), true)), 1.0, 1e-3).unwrap();
        assert!(!s.well_conditioned);
    }

    #[test]
    fn sakiadis_reverse_branch_has_one_zero() {
        let p = sakiadis(Sign::Minus);
        let r = scan_gamma(&p, &[2.0, 2.5, 3.0, 3.5, 4.0], &Tolerances::default()).unwrap();
        assert_eq!(r.brackets.len(), 1);
        let b = r.brackets[0];
        assert!(b.lo < 2.954391 && 2.954391 < b.hi);
        assert_eq!(r.verdict, Verdict::UniqueSolutionIndicated);
        assert_eq!(r.sensitivity.len(), 1);
        assert!(r.sensitivity[0].slope < 0.0);
    }
}
