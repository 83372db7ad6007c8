//! Model constants, the nonlinearities G, r, h and the reaction terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{scan_roots, ROOT_TOL, SCAN_SAMPLES};

/// Band around zero inside which an eigenvalue real part counts as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DecayForm {
    #[default]
    Power,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub omega: f64,
    pub theta: f64,
    pub p: f64,
    pub lambda1: f64,
    pub beta: f64,
    pub a: f64,
    pub z0: f64,
    pub lambda_b: f64,
    pub alpha_b: f64,
    pub eta: f64,
    pub sigma: f64,
    pub decay_form: DecayForm,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega: 0.4,
            theta: 0.7,
            p: 0.7,
            lambda1: 1.0,
            beta: 3.0,
            a: 1.0,
            z0: 2.0,
            lambda_b: 0.0,
            alpha_b: 0.0,
            eta: 0.0,
            sigma: 0.0,
            decay_form: DecayForm::Power,
        }
    }
}

fn check(name: &'static str, v: f64, ok: bool, reason: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParam {
            name,
            reason: "not finite".into(),
        });
    }
    if !ok {
        return Err(Error::InvalidParam {
            name,
            reason: format!("{reason}, got {v}"),
        });
    }
    Ok(())
}

impl ModelParams {
    /// Sign and finiteness checks on every constant.
    pub fn validate(&self) -> Result<()> {
        check("omega", self.omega, self.omega >= 0.0, "must be >= 0")?;
        check("theta", self.theta, self.theta >= 0.0, "must be >= 0")?;
        check("p", self.p, true, "")?;
        check("lambda1", self.lambda1, self.lambda1 > 0.0, "must be > 0")?;
        check("beta", self.beta, self.beta > 0.0, "must be > 0")?;
        check("a", self.a, self.a >= 0.0, "must be >= 0")?;
        check("z0", self.z0, self.z0 > 0.0, "must be > 0")?;
        check(
            "lambda_b",
            self.lambda_b,
            self.lambda_b >= 0.0,
            "must be >= 0",
        )?;
        check("alpha_b", self.alpha_b, self.alpha_b >= 0.0, "must be >= 0")?;
        check("eta", self.eta, self.eta >= 0.0, "must be >= 0")?;
        check("sigma", self.sigma, self.sigma >= 0.0, "must be >= 0")?;
        Ok(())
    }

    /// kappa = omega - eta.
    pub fn kappa(&self) -> f64 {
        self.omega - self.eta
    }

    /// G'(0) r(0) < omega < G'(0).
    pub fn excitability_hypothesis(&self) -> bool {
        let g0 = eval_g_prime(0.0, self);
        g0 * eval_r(0.0, self) < self.omega && self.omega < g0
    }

    /// Human readable warnings for soft constraints.
    pub fn warnings(&self, spatial: bool) -> Vec<String> {
        let mut w = Vec::new();
        if !self.excitability_hypothesis() {
            w.push("excitability hypothesis G'(0)r(0) < omega < G'(0) does not hold".to_string());
        }
        if spatial && self.eta > 0.0 && self.omega <= self.eta {
            w.push(format!(
                "omega ({}) <= eta ({}): activity need not decay",
                self.omega, self.eta
            ));
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SiteState {
    pub lambda: f64,
    pub alpha: f64,
}

impl SiteState {
    pub fn new(lambda: f64, alpha: f64) -> Self {
        Self { lambda, alpha }
    }
}

pub fn eval_g(z: f64, params: &ModelParams) -> f64 {
    z * (params.z0 - z)
}

pub fn eval_g_checked(z: f64, params: &ModelParams) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    Ok(eval_g(z, params))
}

pub fn eval_g_prime(z: f64, params: &ModelParams) -> f64 {
    params.z0 - 2.0 * z
}

pub fn eval_r(alpha: f64, params: &ModelParams) -> f64 {
    let x = -params.beta * (alpha - params.a);
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

pub fn eval_r_checked(alpha: f64, params: &ModelParams) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha"));
    }
    Ok(eval_r(alpha, params))
}

pub fn eval_r_prime(alpha: f64, params: &ModelParams) -> f64 {
    let r = eval_r(alpha, params);
    params.beta * r * (1.0 - r)
}

pub fn eval_h(lambda: f64, params: &ModelParams) -> f64 {
    match params.decay_form {
        DecayForm::Power => params.theta * (1.0 + lambda / params.lambda1).powf(-params.p),
        DecayForm::Exponential => params.theta * (-params.p * lambda).exp(),
    }
}

pub fn eval_h_prime(lambda: f64, params: &ModelParams) -> f64 {
    match params.decay_form {
        DecayForm::Power => {
            -params.p * params.theta / params.lambda1
                * (1.0 + lambda / params.lambda1).powf(-params.p - 1.0)
        }
        DecayForm::Exponential => -params.p * params.theta * (-params.p * lambda).exp(),
    }
}

/// Phi(lambda, alpha) = -omega (lambda - lambda_b) + r(alpha) G(lambda).
pub fn reaction_phi(state: SiteState, params: &ModelParams) -> f64 {
    -params.omega * (state.lambda - params.lambda_b)
        + eval_r(state.alpha, params) * eval_g(state.lambda, params)
}

/// Psi(lambda, alpha) = theta alpha_b - alpha h(lambda).
pub fn reaction_psi(state: SiteState, params: &ModelParams) -> f64 {
    params.theta * params.alpha_b - state.alpha * eval_h(state.lambda, params)
}

/// Positive root of -omega lambda + G(lambda).
pub fn lambda_star(params: &ModelParams) -> Result<f64> {
    let g0 = eval_g_prime(0.0, params);
    if params.omega >= g0 {
        return Err(Error::NoExcitedState);
    }
    // G(l)/l - omega has the same positive roots and is nonzero at 0+.
    let q = |l: f64| {
        if l == 0.0 {
            g0 - params.omega
        } else {
            eval_g(l, params) / l - params.omega
        }
    };
    let roots = scan_roots(q, 0.0, params.z0, SCAN_SAMPLES, ROOT_TOL)?;
    roots
        .into_iter()
        .rfind(|&r| r > 0.0)
        .ok_or(Error::NoExcitedState)
}

/// Tension at which the lambda-nullcline lifts off zero: r(alpha_c) = omega/G'(0).
pub fn alpha_c(params: &ModelParams) -> Result<f64> {
    let rc = params.omega / eval_g_prime(0.0, params);
    if rc <= 0.0 {
        return Err(Error::AlwaysExcitable);
    }
    if rc >= 1.0 {
        return Err(Error::NeverExcitable);
    }
    Ok(params.a - (1.0 / rc - 1.0).ln() / params.beta)
}

/// Largest nonnegative root of Phi(., alpha) = 0.
pub fn lambda_nullcline(alpha: f64, params: &ModelParams) -> f64 {
    let r = eval_r(alpha, params);
    let w = params.omega;
    if r == 0.0 {
        return params.lambda_b;
    }
    let b = r * params.z0 - w;
    let disc = b * b + 4.0 * r * w * params.lambda_b;
    let root = (b + disc.max(0.0).sqrt()) / (2.0 * r);
    root.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Saddle,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub state: SiteState,
    pub stability: Stability,
    pub eigen_re: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub points: Vec<FixedPoint>,
    /// Set when the count is even, which signals a tangency.
    pub degenerate: bool,
}

/// Analytic Jacobian of (Phi, Psi) with respect to (lambda, alpha).
pub fn jacobian(state: SiteState, params: &ModelParams) -> [[f64; 2]; 2] {
    let (l, al) = (state.lambda, state.alpha);
    [
        [
            -params.omega + eval_r(al, params) * eval_g_prime(l, params),
            eval_r_prime(al, params) * eval_g(l, params),
        ],
        [-al * eval_h_prime(l, params), -eval_h(l, params)],
    ]
}

/// Real parts of the eigenvalues of a 2x2 matrix, ascending.
pub fn eigen_real_parts(j: [[f64; 2]; 2]) -> [f64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [(tr - s) / 2.0, (tr + s) / 2.0]
    } else {
        [tr / 2.0, tr / 2.0]
    }
}

pub fn classify(eig: [f64; 2]) -> Stability {
    let neg = eig.iter().filter(|&&e| e < -MARGINAL_BAND).count();
    let pos = eig.iter().filter(|&&e| e > MARGINAL_BAND).count();
    match (neg, pos) {
        (2, _) => Stability::Stable,
        (_, 2) => Stability::Unstable,
        (1, 1) => Stability::Saddle,
        _ => Stability::Marginal,
    }
}

/// Tension on the alpha-nullcline above a given activity.
pub fn alpha_nullcline(lambda: f64, params: &ModelParams) -> f64 {
    params.theta * params.alpha_b / eval_h(lambda, params)
}

pub fn fixed_points(params: &ModelParams) -> Result<FixedPoints> {
    fixed_points_with(params, SCAN_SAMPLES)
}

/// Nullcline intersections found with a sign scan of `samples` intervals.
pub fn fixed_points_with(params: &ModelParams, samples: usize) -> Result<FixedPoints> {
    let f = |l: f64| reaction_phi(SiteState::new(l, alpha_nullcline(l, params)), params);
    let roots = scan_roots(f, 0.0, 1.5 * params.z0, samples, ROOT_TOL)?;
    let points: Vec<FixedPoint> = roots
        .into_iter()
        .map(|l| {
            let state = SiteState::new(l, alpha_nullcline(l, params));
            let eigen_re = eigen_real_parts(jacobian(state, params));
            FixedPoint {
                state,
                stability: classify(eigen_re),
                eigen_re,
            }
        })
        .collect();
    let degenerate = points.len().is_multiple_of(2);
    Ok(FixedPoints { points, degenerate })
}
