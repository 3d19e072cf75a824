//! Algebra of the extended stretching group
//! `x* = λ^δ x`, `u* = λ u`, `h* = λ^σ h`.
//!
//! Everything here is closed-form: starred initial conditions, recovery of
//! the group parameter λ from the starred asymptotic slope, the
//! transformation function Γ, and the rescaling of starred profiles back to
//! physical variables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("group exponent {name} must be finite and nonzero, got {value}")]
    ZeroExponent { name: &'static str, value: f64 },
    #[error("delta = 1 leaves the exponent 1/(1 - delta) undefined")]
    UnitDelta,
    #[error("h* must be positive, got {0}")]
    NonPositiveHStar(f64),
    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("no positive lambda: the power base {base} is not positive")]
    NoPositiveLambda { base: f64 },
}

/// Exponents of the stretching group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    delta: f64,
    sigma: f64,
}

impl GroupSpec {
    pub fn new(delta: f64, sigma: f64) -> Result<Self, ScalingError> {
        if !(delta.is_finite() && delta != 0.0) {
            return Err(ScalingError::ZeroExponent {
                name: "delta",
                value: delta,
            });
        }
        if !(sigma.is_finite() && sigma != 0.0) {
            return Err(ScalingError::ZeroExponent {
                name: "sigma",
                value: sigma,
            });
        }
        if delta == 1.0 {
            return Err(ScalingError::UnitDelta);
        }
        Ok(Self { delta, sigma })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Boundary values `u(0)`, `u'(0)` and `u'(∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub u0: f64,
    pub v0: f64,
    pub v_inf: f64,
}

/// Sign of the starred missing initial condition `u*''(0) = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl std::str::FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+1" | "1" | "+" | "plus" => Ok(Sign::Plus),
            "-1" | "-" | "minus" => Ok(Sign::Minus),
            other => Err(format!("invalid sign '{other}', expected +1 or -1")),
        }
    }
}

/// One point of a solution profile: `(x, u, u', u'')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RescaledProfile {
    pub points: Vec<ProfilePoint>,
}

fn check_h_star(h_star: f64) -> Result<(), ScalingError> {
    if h_star > 0.0 && h_star.is_finite() {
        Ok(())
    } else {
        Err(ScalingError::NonPositiveHStar(h_star))
    }
}

fn check_lambda(lambda: f64) -> Result<(), ScalingError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(ScalingError::NonPositiveLambda(lambda))
    }
}

/// `[h*^{1/σ} u0, h*^{(1-δ)/σ} v0, s]`.
pub fn starred_initial_state(
    bd: &BoundaryData,
    g: &GroupSpec,
    h_star: f64,
    s: Sign,
) -> Result<[f64; 3], ScalingError> {
    check_h_star(h_star)?;
    Ok([
        h_star.powf(1.0 / g.sigma) * bd.u0,
        h_star.powf((1.0 - g.delta) / g.sigma) * bd.v0,
        s.value(),
    ])
}

/// Group parameter from the starred slope at the truncated boundary.
///
/// With `v_inf != 0` the asymptotic condition is invariant and
/// `λ = (v*_∞ / v_∞)^{1/(1-δ)}`. With `v_inf == 0` the non-invariant
/// condition `u'(∞) = 1 - h^{(1-δ)/σ}` gives
/// `λ = (v*_∞ + h*^{(1-δ)/σ})^{1/(1-δ)}`.
pub fn compute_lambda(
    v_star_inf: f64,
    h_star: f64,
    g: &GroupSpec,
    bd: &BoundaryData,
) -> Result<f64, ScalingError> {
    check_h_star(h_star)?;
    let base = if bd.v_inf != 0.0 {
        v_star_inf / bd.v_inf
    } else {
        v_star_inf + h_star.powf((1.0 - g.delta) / g.sigma)
    };
    if !(base > 0.0) || !base.is_finite() {
        return Err(ScalingError::NoPositiveLambda { base });
    }
    let lambda = base.powf(1.0 / (1.0 - g.delta));
    check_lambda(lambda)?;
    Ok(lambda)
}

/// `h = λ^{-σ} h*`.
pub fn map_h(lambda: f64, h_star: f64, sigma: f64) -> Result<f64, ScalingError> {
    check_lambda(lambda)?;
    check_h_star(h_star)?;
    Ok(lambda.powf(-sigma) * h_star)
}

/// Transformation function `Γ = λ^{-σ} h* - 1`.
pub fn compute_gamma(lambda: f64, h_star: f64, sigma: f64) -> Result<f64, ScalingError> {
    Ok(map_h(lambda, h_star, sigma)? - 1.0)
}

/// Maps starred points `(x*, u*, u*', u*'')` to physical variables.
pub fn rescale_profile(
    starred: &[ProfilePoint],
    lambda: f64,
    g: &GroupSpec,
) -> Result<RescaledProfile, ScalingError> {
    check_lambda(lambda)?;
    let d = g.delta;
    let (sx, su, sdu, sd2u) = (
        lambda.powf(-d),
        1.0 / lambda,
        lambda.powf(d - 1.0),
        lambda.powf(2.0 * d - 1.0),
    );
    Ok(RescaledProfile {
        points: starred
            .iter()
            .map(|p| ProfilePoint {
                x: sx * p.x,
                u: su * p.u,
                du: sdu * p.du,
                d2u: sd2u * p.d2u,
            })
            .collect(),
    })
}

/// Inverse of [`rescale_profile`]: physical points to starred variables.
pub fn forward_scale_profile(
    physical: &[ProfilePoint],
    lambda: f64,
    g: &GroupSpec,
) -> Result<Vec<ProfilePoint>, ScalingError> {
    check_lambda(lambda)?;
    let d = g.delta;
    let (sx, su, sdu, sd2u) = (
        lambda.powf(d),
        lambda,
        lambda.powf(1.0 - d),
        lambda.powf(1.0 - 2.0 * d),
    );
    Ok(physical
        .iter()
        .map(|p| ProfilePoint {
            x: sx * p.x,
            u: su * p.u,
            du: sdu * p.du,
            d2u: sd2u * p.d2u,
        })
        .collect())
}

/// Physical second derivative at the origin for starred value `s`:
/// `s λ^{2δ-1}`.
pub fn physical_missing_ic(s: Sign, lambda: f64, g: &GroupSpec) -> f64 {
    s.value() * lambda.powf(2.0 * g.delta - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fs_group() -> GroupSpec {
        GroupSpec::new(-1.0, 4.0).unwrap()
    }

    #[test]
    fn group_rejects_degenerate_exponents() {
        assert!(GroupSpec::new(0.0, 4.0).is_err());
        assert!(GroupSpec::new(-1.0, 0.0).is_err());
        assert_eq!(GroupSpec::new(1.0, 4.0), Err(ScalingError::UnitDelta));
    }

    #[test]
    fn initial_states() {
        let zero = BoundaryData {
            u0: 0.0,
            v0: 0.0,
            v_inf: 1.0,
        };
        assert_eq!(
            starred_initial_state(&zero, &fs_group(), 5.0, Sign::Plus).unwrap(),
            [0.0, 0.0, 1.0]
        );
        let sak = BoundaryData {
            u0: 0.0,
            v0: 1.0,
            v_inf: 0.0,
        };
        let s = starred_initial_state(&sak, &fs_group(), 2.954391, Sign::Minus).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 1.718834).abs() < 1e-6);
        assert_eq!(s[2], -1.0);
        assert_eq!(
            starred_initial_state(&sak, &fs_group(), 1.0, Sign::Minus).unwrap(),
            [0.0, 1.0, -1.0]
        );
        assert!(starred_initial_state(&sak, &fs_group(), 0.0, Sign::Minus).is_err());
        assert!(starred_initial_state(&sak, &fs_group(), -2.0, Sign::Minus).is_err());
    }

    #[test]
    fn lambda_cases() {
        let g = fs_group();
        let unit = BoundaryData {
            u0: 0.0,
            v0: 0.0,
            v_inf: 1.0,
        };
        assert_eq!(compute_lambda(1.0, 3.0, &g, &unit).unwrap(), 1.0);
        assert!((compute_lambda(4.0, 3.0, &g, &unit).unwrap() - 2.0).abs() < 1e-15);

        let sak = BoundaryData {
            u0: 0.0,
            v0: 1.0,
            v_inf: 0.0,
        };
        let lambda = compute_lambda(0.0, 2.954391, &g, &sak).unwrap();
        assert!((lambda - 1.311043).abs() < 1e-6);

        assert!(matches!(
            compute_lambda(-1.0, 1.0, &g, &unit),
            Err(ScalingError::NoPositiveLambda { .. })
        ));
        assert!(matches!(
            compute_lambda(-2.0, 1.0, &g, &sak),
            Err(ScalingError::NoPositiveLambda { .. })
        ));
    }

    #[test]
    fn gamma_and_h() {
        assert_eq!(compute_gamma(1.0, 1.0, 4.0).unwrap(), 0.0);
        assert_eq!(compute_gamma(2.0, 16.0, 4.0).unwrap(), 0.0);
        assert!(compute_gamma(1.311043, 2.954391, 4.0).unwrap().abs() < 1e-5);
        assert_eq!(map_h(1.0, 1.0, 4.0).unwrap(), 1.0);
        assert_eq!(map_h(2.0, 32.0, 4.0).unwrap(), 2.0);
        assert!((map_h(1.311043, 2.954391, 4.0).unwrap() - 1.0).abs() < 1e-5);
        assert!(compute_gamma(0.0, 1.0, 4.0).is_err());
        assert!(compute_gamma(1.0, -1.0, 4.0).is_err());
    }

    #[test]
    fn rescaling_recovers_table_values() {
        let g = fs_group();
        let p = ProfilePoint {
            x: 0.0,
            u: 0.0,
            du: 1.0,
            d2u: 1.0,
        };
        assert_eq!(rescale_profile(&[p], 1.0, &g).unwrap().points, vec![p]);

        let lambda = 1.311043;
        let starred = ProfilePoint {
            x: 0.0,
            u: 0.0,
            du: 1.718823,
            d2u: -1.0,
        };
        let out = rescale_profile(&[starred], lambda, &g).unwrap().points[0];
        assert!((out.du - 1.0).abs() < 1e-5);
        assert!((out.d2u + 0.443761).abs() < 1e-6);

        let lambda = 67.804746f64.powf(0.25);
        let starred = ProfilePoint {
            x: 0.0,
            u: 0.0,
            du: 0.0,
            d2u: -1.0,
        };
        let out = rescale_profile(&[starred], lambda, &g).unwrap().points[0];
        assert!((out.d2u + 0.042321).abs() < 1e-6);
    }

    #[test]
    fn sign_parsing() {
        assert_eq!("+1".parse::<Sign>().unwrap(), Sign::Plus);
        assert_eq!("-1".parse::<Sign>().unwrap(), Sign::Minus);
        assert!("0".parse::<Sign>().is_err());
    }

    proptest! {
        #[test]
        fn gamma_is_h_minus_one(lambda in 0.1f64..10.0, h in 1e-3f64..1e4, sigma in prop_oneof![Just(4.0), 0.5f64..8.0]) {
            let gamma = compute_gamma(lambda, h, sigma).unwrap();
            let mapped = map_h(lambda, h, sigma).unwrap();
            prop_assert_eq!(gamma, mapped - 1.0);
            prop_assert!(gamma > -1.0);
        }

        #[test]
        fn rescale_round_trip(lambda in 0.05f64..20.0, delta in prop_oneof![Just(-1.0), -3.0f64..0.9],
                              x in 0.0f64..50.0, u in -10.0f64..10.0, du in -10.0f64..10.0, d2u in -10.0f64..10.0) {
            let g = GroupSpec::new(delta, 4.0).unwrap();
            let p = ProfilePoint { x, u, du, d2u };
            let back = forward_scale_profile(&rescale_profile(&[p], lambda, &g).unwrap().points, lambda, &g).unwrap()[0];
            for (a, b) in [(back.x, x), (back.u, u), (back.du, du), (back.d2u, d2u)] {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
