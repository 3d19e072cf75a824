//! Problem definitions: the generic third-order class embedded in the
//! extended stretching group, plus the Sakiadis and Falkner-Skan presets.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ode::OdeSystem;
use crate::scaling::{BoundaryData, GroupSpec, ScalingError, Sign};

/// Third derivative of the starred unknown as a function of
/// `(h*, x*, [u*, u*', u*''])`.
pub type StarredThirdDerivative = dyn Fn(f64, f64, &[f64; 3]) -> f64 + Send + Sync;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error(transparent)]
    Group(#[from] ScalingError),
    #[error("truncated boundary must be positive, got {0}")]
    InvalidTruncatedBoundary(f64),
    #[error("unknown problem '{0}' (expected sakiadis, falkner-skan or blasius)")]
    UnknownProblem(String),
}

/// A third-order BVP on `[0, ∞)` together with its embedding data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub group: GroupSpec,
    pub boundary: BoundaryData,
    pub missing_ic_sign: Sign,
    pub truncated_boundary: f64,
    pub params: BTreeMap<String, f64>,
    third: Arc<StarredThirdDerivative>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("group", &self.group)
            .field("boundary", &self.boundary)
            .field("missing_ic_sign", &self.missing_ic_sign)
            .field("truncated_boundary", &self.truncated_boundary)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        group: GroupSpec,
        boundary: BoundaryData,
        missing_ic_sign: Sign,
        truncated_boundary: f64,
        third: Arc<StarredThirdDerivative>,
    ) -> Result<Self, ProblemError> {
        if !(truncated_boundary > 0.0 && truncated_boundary.is_finite()) {
            return Err(ProblemError::InvalidTruncatedBoundary(truncated_boundary));
        }
        Ok(Self {
            name: name.into(),
            group,
            boundary,
            missing_ic_sign,
            truncated_boundary,
            params: BTreeMap::new(),
            third,
        })
    }

    pub fn with_truncated_boundary(mut self, x_inf: f64) -> Result<Self, ProblemError> {
        if !(x_inf > 0.0 && x_inf.is_finite()) {
            return Err(ProblemError::InvalidTruncatedBoundary(x_inf));
        }
        self.truncated_boundary = x_inf;
        Ok(self)
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.missing_ic_sign = sign;
        self
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// The starred initial value problem for a fixed `h*`, as a first-order
    /// system in `[u*, u*', u*'']`.
    pub fn starred_rhs(&self, h_star: f64) -> StarredSystem<'_> {
        StarredSystem {
            third: self.third.as_ref(),
            h_star,
        }
    }

    pub fn starred_third_derivative(&self, h_star: f64, x: f64, state: &[f64; 3]) -> f64 {
        (self.third)(h_star, x, state)
    }
}

pub struct StarredSystem<'a> {
    third: &'a StarredThirdDerivative,
    h_star: f64,
}

impl OdeSystem for StarredSystem<'_> {
    fn dimension(&self) -> usize {
        3
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        let state = [y[0], y[1], y[2]];
        dydt[0] = y[1];
        dydt[1] = y[2];
        dydt[2] = (self.third)(self.h_star, t, &state);
    }
}

fn invariant_group() -> GroupSpec {
    GroupSpec::new(-1.0, 4.0).expect("(-1, 4) is a valid group")
}

/// Sakiadis flow `f''' + ½ f f'' = 0`, `f(0) = 0`, `f'(0) = 1`, `f'(∞) = 0`.
///
/// The equation is invariant under the group, so the starred right-hand side
/// does not depend on `h*`.
pub fn sakiadis(sign: Sign) -> ProblemSpec {
    ProblemSpec::new(
        "sakiadis",
        invariant_group(),
        BoundaryData {
            u0: 0.0,
            v0: 1.0,
            v_inf: 0.0,
        },
        sign,
        10.0,
        Arc::new(|_h, _x, y: &[f64; 3]| -0.5 * y[0] * y[2]),
    )
    .expect("preset is valid")
}

/// Falkner-Skan model `f''' + f f'' + β(1 - f'^2) = 0`, `f(0) = f'(0) = 0`,
/// `f'(∞) = 1`, embedded with `σ = 4` so that the starred equation reads
/// `f*''' = -f* f*'' - β(h* - f*'^2)`.
pub fn falkner_skan(beta: f64, sign: Sign) -> ProblemSpec {
    let mut p = ProblemSpec::new(
        "falkner-skan",
        invariant_group(),
        BoundaryData {
            u0: 0.0,
            v0: 0.0,
            v_inf: 1.0,
        },
        sign,
        20.0,
        Arc::new(move |h, _x, y: &[f64; 3]| -y[0] * y[2] - beta * (h - y[1] * y[1])),
    )
    .expect("preset is valid");
    p.params.insert("beta".into(), beta);
    p
}

/// Blasius flow, the Falkner-Skan model at `β = 0`.
pub fn blasius(sign: Sign) -> ProblemSpec {
    let mut p = falkner_skan(0.0, sign);
    p.name = "blasius".into();
    p
}

/// Embeds `u''' = f(x, u, u', u'')` in the extended problem: the starred
/// right-hand side is
/// `h*^{(1-3δ)/σ} f(h*^{-δ/σ} x, h*^{-1/σ} u, h*^{(δ-1)/σ} u', h*^{(2δ-1)/σ} u'')`,
/// which reduces to `f` at `h* = 1`.
pub fn generic_third_order<F>(
    f: F,
    bd: BoundaryData,
    g: GroupSpec,
    x_inf: f64,
    sign: Sign,
) -> Result<ProblemSpec, ProblemError>
where
    F: Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
{
    let (d, s) = (g.delta(), g.sigma());
    let third = move |h: f64, x: f64, y: &[f64; 3]| {
        h.powf((1.0 - 3.0 * d) / s)
            * f(
                h.powf(-d / s) * x,
                h.powf(-1.0 / s) * y[0],
                h.powf((d - 1.0) / s) * y[1],
                h.powf((2.0 * d - 1.0) / s) * y[2],
            )
    };
    ProblemSpec::new("generic", g, bd, sign, x_inf, Arc::new(third))
}

/// Looks up a named preset. `beta` is used by `falkner-skan` only.
pub fn preset(name: &str, beta: f64, sign: Sign) -> Result<ProblemSpec, ProblemError> {
    match name {
        "sakiadis" => Ok(sakiadis(sign)),
        "falkner-skan" => Ok(falkner_skan(beta, sign)),
        "blasius" => Ok(blasius(sign)),
        other => Err(ProblemError::UnknownProblem(other.to_string())),
    }
}
