//! Single-site integration and the relaxation, window, forcing and hysteresis analyses.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    fixed_points, lambda_star, reaction_phi, reaction_psi, ModelParams, SiteState, Stability,
};
use crate::shocks::{apply_shock, Shock, ShockSchedule};

pub const CLAMP_THRESHOLD: f64 = 1e-12;
pub const CLAMP_WARN_LIMIT: u64 = 1_000_000;
pub const PERTURBATION: f64 = 1e-9;
pub const TRANSIENT_FRACTION: f64 = 0.5;
pub const MIN_EVENTS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stepping {
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
    /// Record every `stride`-th grid step; shock times and the final time are always kept.
    pub stride: usize,
    /// Lift lambda to a tiny positive value at start and after each shock.
    pub perturb: bool,
}

impl Stepping {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self {
            t_end,
            dt,
            method: Method::Rk4,
            stride: 1,
            perturb: false,
        }
    }

    pub fn method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn stride(self, stride: usize) -> Self {
        Self {
            stride: stride.max(1),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::BadHorizon(self.t_end));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParam {
                name: "dt",
                reason: format!("must be > 0, got {}", self.dt),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SiteState>,
    /// Indices whose state is the post-jump value of a shock.
    pub shock_marks: Vec<usize>,
    pub params: ModelParams,
    pub clamps: u64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn lambda(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.lambda).collect()
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.alpha).collect()
    }

    pub fn last_shock_time(&self) -> Option<f64> {
        self.shock_marks.last().map(|&i| self.times[i])
    }

    /// Columnar text: header, then `t lambda alpha shock_flag` at 17 significant digits.
    pub fn write_columns<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t lambda alpha shock_flag")?;
        let mut marks = self.shock_marks.iter().peekable();
        for (i, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            let flag = if marks.peek() == Some(&&i) {
                marks.next();
                1
            } else {
                0
            };
            writeln!(w, "{t:.16e} {:.16e} {:.16e} {flag}", s.lambda, s.alpha)?;
        }
        Ok(())
    }
}

fn rhs(s: SiteState, p: &ModelParams) -> SiteState {
    SiteState::new(reaction_phi(s, p), reaction_psi(s, p))
}

fn axpy(s: SiteState, h: f64, d: SiteState) -> SiteState {
    SiteState::new(s.lambda + h * d.lambda, s.alpha + h * d.alpha)
}

fn step(s: SiteState, h: f64, p: &ModelParams, method: Method) -> SiteState {
    match method {
        Method::Euler => axpy(s, h, rhs(s, p)),
        Method::Rk4 => {
            let k1 = rhs(s, p);
            let k2 = rhs(axpy(s, h / 2.0, k1), p);
            let k3 = rhs(axpy(s, h / 2.0, k2), p);
            let k4 = rhs(axpy(s, h, k3), p);
            SiteState::new(
                s.lambda + h / 6.0 * (k1.lambda + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda),
                s.alpha + h / 6.0 * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha),
            )
        }
    }
}

/// Clamps a component to zero, counting values below the roundoff threshold.
pub(crate) fn clamp(x: &mut f64, clamps: &mut u64) {
    if *x < 0.0 {
        if *x < -CLAMP_THRESHOLD {
            *clamps += 1;
        }
        *x = 0.0;
    }
}

pub(crate) fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Drives a fixed-step loop on the grid `k * dt`, stopping exactly at shock times.
/// `advance(h)` steps the state, `jump(shock)` applies a shock, `record(t, shocked)` stores a sample.
pub(crate) fn drive<A, J, R>(
    shocks: &[Shock],
    stepping: &Stepping,
    mut advance: A,
    mut jump: J,
    mut record: R,
) -> Result<()>
where
    A: FnMut(f64, f64) -> Result<()>,
    J: FnMut(&Shock) -> Result<()>,
    R: FnMut(f64, bool),
{
    let mut next = 0;
    let mut t = 0.0;
    let mut shocked = false;
    while next < shocks.len() && same_time(shocks[next].time, 0.0) {
        jump(&shocks[next])?;
        next += 1;
        shocked = true;
    }
    record(0.0, shocked);
    let n_steps = (stepping.t_end / stepping.dt).round().max(1.0) as u64;
    let n_steps = if same_time(n_steps as f64 * stepping.dt, stepping.t_end) {
        n_steps
    } else {
        (stepping.t_end / stepping.dt).ceil() as u64
    };
    for k in 1..=n_steps {
        let grid_t = if k == n_steps {
            stepping.t_end
        } else {
            k as f64 * stepping.dt
        };
        while next < shocks.len()
            && shocks[next].time < grid_t
            && !same_time(shocks[next].time, grid_t)
        {
            let ts = shocks[next].time;
            if ts > t {
                advance(t, ts - t)?;
                t = ts;
            }
            while next < shocks.len() && same_time(shocks[next].time, ts) {
                jump(&shocks[next])?;
                next += 1;
            }
            record(t, true);
        }
        advance(t, grid_t - t)?;
        t = grid_t;
        let mut shocked = false;
        while next < shocks.len() && same_time(shocks[next].time, t) {
            jump(&shocks[next])?;
            next += 1;
            shocked = true;
        }
        if shocked || k % stepping.stride as u64 == 0 || k == n_steps {
            record(t, shocked);
        }
    }
    Ok(())
}

/// Fixed-step integration of (Phi, Psi) with exact stops at each shock.
pub fn integrate_site(
    params: &ModelParams,
    schedule: &ShockSchedule,
    initial: SiteState,
    stepping: &Stepping,
) -> Result<Trajectory> {
    params.validate()?;
    stepping.validate()?;
    if !(initial.lambda >= 0.0 && initial.alpha >= 0.0) {
        return Err(Error::InvalidParam {
            name: "initial",
            reason: "state must be finite and nonnegative".into(),
        });
    }
    let shocks = schedule.realize_seeded(stepping.t_end)?;
    integrate_shocks(params, &shocks, initial, stepping)
}

/// Same as [`integrate_site`] for an already realized shock list.
pub fn integrate_shocks(
    params: &ModelParams,
    shocks: &[Shock],
    initial: SiteState,
    stepping: &Stepping,
) -> Result<Trajectory> {
    let mut state = initial;
    if stepping.perturb {
        state.lambda = state.lambda.max(PERTURBATION);
    }
    let state = std::cell::Cell::new(state);
    let mut clamps = 0u64;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut marks = Vec::new();
    drive(
        shocks,
        stepping,
        |t, h| {
            let mut s = step(state.get(), h, params, stepping.method);
            if !(s.lambda.is_finite() && s.alpha.is_finite()) {
                return Err(Error::BlowUp { time: t + h });
            }
            clamp(&mut s.lambda, &mut clamps);
            clamp(&mut s.alpha, &mut clamps);
            state.set(s);
            Ok(())
        },
        |shock| {
            let mut s = apply_shock(state.get(), shock);
            if stepping.perturb {
                s.lambda = s.lambda.max(PERTURBATION);
            }
            state.set(s);
            Ok(())
        },
        |t, shocked| {
            if shocked {
                marks.push(times.len());
            }
            times.push(t);
            states.push(state.get());
        },
    )?;
    let mut warnings = Vec::new();
    if clamps > CLAMP_WARN_LIMIT {
        warnings.push(format!(
            "{clamps} negativity clamps exceeded the quality limit"
        ));
    }
    Ok(Trajectory {
        times,
        states,
        shock_marks: marks,
        params: *params,
        clamps,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Relaxation {
    Relaxed { relaxed_at: f64 },
    NotRelaxed,
}

/// Lowest stable fixed point, used as the relaxation floor.
pub fn rest_state(params: &ModelParams) -> SiteState {
    fixed_points(params)
        .ok()
        .and_then(|fp| {
            fp.points
                .into_iter()
                .find(|f| f.stability == Stability::Stable)
                .map(|f| f.state)
        })
        .unwrap_or(SiteState::new(params.lambda_b, 0.0))
}

/// Earliest time after the last shock from which the state stays within `eps` of rest.
pub fn check_relaxation(traj: &Trajectory, eps: f64) -> Relaxation {
    let floor = rest_state(&traj.params);
    let start = traj.shock_marks.last().copied().unwrap_or(0);
    let near = |s: &SiteState| s.lambda <= floor.lambda + eps && s.alpha <= floor.alpha + eps;
    let mut first = None;
    for i in (start..traj.states.len()).rev() {
        if near(&traj.states[i]) {
            first = Some(i);
        } else {
            break;
        }
    }
    match first {
        Some(i) => Relaxation::Relaxed {
            relaxed_at: traj.times[i],
        },
        None => Relaxation::NotRelaxed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Longest contiguous interval with lambda >= lambda* - delta.
pub fn max_activity_window(traj: &Trajectory, delta: f64) -> Result<Option<Window>> {
    let level = lambda_star(&traj.params)? - delta;
    let mut best: Option<Window> = None;
    let mut open: Option<f64> = None;
    for (i, s) in traj.states.iter().enumerate() {
        let t = traj.times[i];
        if s.lambda >= level {
            let start = *open.get_or_insert(t);
            let w = Window { start, end: t };
            if best.is_none_or(|b| w.length() > b.length()) {
                best = Some(w);
            }
        } else {
            open = None;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum ForcedRegime {
    Decaying {
        min_lambda: f64,
    },
    Sustained {
        liminf_estimate: f64,
        within_delta: bool,
    },
}

impl ForcedRegime {
    pub fn is_sustained(&self) -> bool {
        matches!(self, ForcedRegime::Sustained { .. })
    }
}

/// Floor separating sustained activity from decay to baseline.
pub fn sustained_floor(params: &ModelParams) -> Result<f64> {
    Ok((10.0 * params.lambda_b).max(0.05 * lambda_star(params)?))
}

/// Runs a periodic or Poisson schedule and classifies the second half of the run.
pub fn classify_forced_regime(
    params: &ModelParams,
    schedule: &ShockSchedule,
    initial: SiteState,
    stepping: &Stepping,
    delta: f64,
) -> Result<ForcedRegime> {
    let rate = schedule.event_rate().ok_or_else(|| {
        Error::Insufficient("forced regime needs a periodic or poisson schedule".into())
    })?;
    if rate * stepping.t_end < MIN_EVENTS {
        return Err(Error::Insufficient(format!(
            "horizon {} covers {:.1} events, at least {MIN_EVENTS} required",
            stepping.t_end,
            rate * stepping.t_end
        )));
    }
    let traj = integrate_site(params, schedule, initial, stepping)?;
    classify_trajectory(&traj, stepping.t_end * TRANSIENT_FRACTION, delta)
}

/// Classification of an existing run, discarding samples before `from`.
pub fn classify_trajectory(traj: &Trajectory, from: f64, delta: f64) -> Result<ForcedRegime> {
    let ls = lambda_star(&traj.params)?;
    let floor = sustained_floor(&traj.params)?;
    let min = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= from)
        .map(|(_, s)| s.lambda)
        .fold(f64::INFINITY, f64::min);
    Ok(if min >= floor {
        ForcedRegime::Sustained {
            liminf_estimate: min,
            within_delta: min >= ls - delta,
        }
    } else {
        ForcedRegime::Decaying { min_lambda: min }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisRow {
    pub alpha_b: f64,
    pub points: Vec<crate::kernel::FixedPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    /// First base tension with a stable high-activity state.
    pub alpha_b1: f64,
    /// First base tension where the low-activity stable state is gone.
    pub alpha_b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisReport {
    pub rows: Vec<HysteresisRow>,
    pub fold: Option<Fold>,
}

fn stable_count(params: &ModelParams, alpha_b: f64) -> Result<usize> {
    let p = ModelParams { alpha_b, ..*params };
    Ok(fixed_points(&p)?
        .points
        .iter()
        .filter(|f| f.stability == Stability::Stable)
        .count())
}

fn bisect_predicate<F: Fn(f64) -> Result<bool>>(
    pred: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Fixed points per base tension plus the bistable interval, refined to 1e-6.
pub fn hysteresis_sweep(params: &ModelParams, alpha_b_grid: &[f64]) -> Result<HysteresisReport> {
    if alpha_b_grid.len() < 2 || alpha_b_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Insufficient(
            "alpha_b grid needs at least two increasing values".into(),
        ));
    }
    let mut rows = Vec::with_capacity(alpha_b_grid.len());
    let mut counts = Vec::with_capacity(alpha_b_grid.len());
    for &ab in alpha_b_grid {
        let p = ModelParams {
            alpha_b: ab,
            ..*params
        };
        let fp = fixed_points(&p)?;
        counts.push(
            fp.points
                .iter()
                .filter(|f| f.stability == Stability::Stable)
                .count(),
        );
        rows.push(HysteresisRow {
            alpha_b: ab,
            points: fp.points,
        });
    }
    let Some(first) = counts.iter().position(|&c| c >= 2) else {
        return Ok(HysteresisReport { rows, fold: None });
    };
    let last = counts.iter().rposition(|&c| c >= 2).unwrap();
    if first == 0 || last + 1 == counts.len() {
        return Err(Error::Insufficient(
            "alpha_b grid does not bracket the fold".into(),
        ));
    }
    let bistable = |ab: f64| stable_count(params, ab).map(|c| c >= 2);
    let alpha_b1 = bisect_predicate(bistable, alpha_b_grid[first - 1], alpha_b_grid[first], 1e-6)?;
    let alpha_b2 = bisect_predicate(
        |ab| bistable(ab).map(|b| !b),
        alpha_b_grid[last],
        alpha_b_grid[last + 1],
        1e-6,
    )?;
    Ok(HysteresisReport {
        rows,
        fold: Some(Fold { alpha_b1, alpha_b2 }),
    })
}
