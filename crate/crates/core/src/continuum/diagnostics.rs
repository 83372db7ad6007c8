use serde::{Deserialize, Serialize};

use super::FieldTrajectory;
use crate::error::{Error, Result};
use crate::kernel::{eval_g, eval_g_prime, eval_h, eval_r, lambda_star, ModelParams};
use crate::roots::{scan_roots, ROOT_TOL, SCAN_SAMPLES};

pub const ENVELOPE_SLACK: f64 = 0.02;

/// Ordinary least-squares slope and intercept.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub times: Vec<f64>,
    pub lambda_l1: Vec<f64>,
    pub alpha_l1: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    /// Decay rate of the tension mass fitted after the last shock.
    pub fitted_rate: Option<f64>,
    pub rate_in_bounds: Option<bool>,
    /// Largest relative excursion outside the exponential envelope.
    pub envelope_excess: Option<f64>,
    pub envelope_ok: Option<bool>,
    pub flags: Vec<String>,
}

impl MassReport {
    /// First time after which the activity mass stays below `eps`.
    pub fn extinction_time(&self, eps: f64) -> Option<f64> {
        let mut first = None;
        for i in (0..self.times.len()).rev() {
            if self.lambda_l1[i] < eps {
                first = Some(self.times[i]);
            } else {
                break;
            }
        }
        first
    }
}

/// k1 = theta - eta and k2 = theta / (1 + lambda*)^p - eta.
pub fn decay_rates(params: &ModelParams) -> Result<(f64, f64)> {
    let ls = lambda_star(params)?;
    Ok((params.theta - params.eta, eval_h(ls, params) - params.eta))
}

pub fn mass_diagnostics(traj: &FieldTrajectory) -> Result<MassReport> {
    let p = &traj.params.model;
    let (k1, k2) = decay_rates(p)?;
    let lambda_l1: Vec<f64> = traj.lambda.iter().map(|u| traj.grid.l1(u)).collect();
    let alpha_l1: Vec<f64> = traj.alpha.iter().map(|u| traj.grid.l1(u)).collect();
    let mut flags = Vec::new();
    let start = traj.shock_marks.last().copied().unwrap_or(0);
    let t0 = traj.times[start];
    let m0 = alpha_l1[start];
    let (xs, ys): (Vec<f64>, Vec<f64>) = (start..traj.times.len())
        .filter(|&i| alpha_l1[i] > 0.0)
        .map(|i| (traj.times[i], alpha_l1[i].ln()))
        .unzip();
    let fitted_rate = linear_fit(&xs, &ys).map(|(s, _)| -s);
    let hypotheses = k2 > 0.0 && p.alpha_b == 0.0;
    if k2 <= 0.0 {
        flags.push(format!("k2 = {k2} <= 0: bound check skipped"));
    }
    if p.alpha_b != 0.0 {
        flags.push("alpha_b != 0: bound check skipped".to_string());
    }
    let (rate_in_bounds, envelope_excess, envelope_ok) = if hypotheses && m0 > 0.0 {
        let excess = (start..traj.times.len())
            .map(|i| {
                let dt = traj.times[i] - t0;
                let lower = m0 * (-k1 * dt).exp();
                let upper = m0 * (-k2 * dt).exp();
                let m = alpha_l1[i];
                ((lower - m) / lower).max((m - upper) / upper).max(0.0)
            })
            .fold(0.0, f64::max);
        let in_bounds = fitted_rate.map(|r| k2 <= r && r <= k1);
        (in_bounds, Some(excess), Some(excess <= ENVELOPE_SLACK))
    } else {
        (None, None, None)
    };
    Ok(MassReport {
        times: traj.times.clone(),
        lambda_l1,
        alpha_l1,
        k1,
        k2,
        fitted_rate,
        rate_in_bounds,
        envelope_excess,
        envelope_ok,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Monostable,
    Bistable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    /// Constant states as (alpha, lambda), ordered by activity.
    pub states: Vec<(f64, f64)>,
    pub regime: Regime,
    /// r(alpha1) G'(lambda1) + eta.
    pub condition_lhs: f64,
    /// h(lambda1) + kappa.
    pub condition_rhs: f64,
}

/// Tension of a constant state with activity `lambda`.
pub fn steady_alpha(lambda: f64, params: &ModelParams) -> f64 {
    params.theta * params.alpha_b / (eval_h(lambda, params) - params.eta)
}

/// Constant states of the local system and the monostable/bistable verdict.
pub fn steady_states(params: &ModelParams) -> Result<SteadyReport> {
    if eval_h(params.z0, params) - params.eta <= 0.0 {
        let lam = scan_roots(
            |l| eval_h(l, params) - params.eta,
            0.0,
            params.z0,
            SCAN_SAMPLES,
            ROOT_TOL,
        )?
        .first()
        .copied()
        .unwrap_or(0.0);
        return Err(Error::Positivity { lambda: lam });
    }
    let kappa = params.kappa();
    let f = |l: f64| eval_r(steady_alpha(l, params), params) * eval_g(l, params) - kappa * l;
    let roots = scan_roots(f, 0.0, params.z0, SCAN_SAMPLES, ROOT_TOL)?;
    let states: Vec<(f64, f64)> = roots
        .iter()
        .map(|&l| (steady_alpha(l, params), l))
        .collect();
    let (a1, l1) = *states
        .first()
        .ok_or_else(|| Error::Insufficient("no constant state found".into()))?;
    let condition_lhs = eval_r(a1, params) * eval_g_prime(l1, params) + params.eta;
    let condition_rhs = eval_h(l1, params) + kappa;
    let regime = if condition_lhs > condition_rhs {
        Regime::Monostable
    } else {
        Regime::Bistable
    };
    Ok(SteadyReport {
        states,
        regime,
        condition_lhs,
        condition_rhs,
    })
}

/// Critical tension separating the two regimes, by bisection on `a`.
pub fn regime_boundary(params: &ModelParams, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let regime = |a: f64| steady_states(&ModelParams { a, ..*params }).map(|r| r.regime);
    let low = regime(lo)?;
    if low == regime(hi)? {
        return Err(Error::Insufficient(
            "regime does not change on the interval".into(),
        ));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if regime(mid)? == low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub times: Vec<f64>,
    pub positions: Vec<Option<f64>>,
    pub speed: Option<f64>,
    /// Cells ahead of the crest where activity increases with x, worst sample of the fit window.
    pub monotonicity_violations: usize,
}

/// Rightmost crossing of `threshold`, linearly interpolated between cell centers.
pub fn front_position(xs: &[f64], lambda: &[f64], threshold: f64) -> Option<f64> {
    let i = lambda.iter().rposition(|&l| l >= threshold)?;
    if i + 1 == lambda.len() {
        return Some(xs[i]);
    }
    let (l0, l1) = (lambda[i], lambda[i + 1]);
    let w = (l0 - threshold) / (l0 - l1);
    Some(xs[i] + w * (xs[i + 1] - xs[i]))
}

fn violations_ahead(lambda: &[f64]) -> usize {
    let crest = lambda
        .iter()
        .enumerate()
        .fold(0, |best, (i, &l)| if l > lambda[best] { i } else { best });
    lambda[crest..]
        .windows(2)
        .filter(|w| w[1] > w[0] * (1.0 + 1e-9) + 1e-12)
        .count()
}

/// Front positions over time and the least-squares speed over the final third.
pub fn track_front(traj: &FieldTrajectory, threshold: f64) -> Result<FrontReport> {
    if traj.grid.dim != 1 {
        return Err(Error::InvalidParam {
            name: "dim",
            reason: "front tracking needs a 1-D grid".into(),
        });
    }
    let xs = traj.grid.xs();
    let positions: Vec<Option<f64>> = traj
        .lambda
        .iter()
        .map(|l| front_position(&xs, l, threshold))
        .collect();
    let seen: Vec<usize> = (0..positions.len())
        .filter(|&i| positions[i].is_some())
        .collect();
    let window = &seen[seen.len() - seen.len() / 3..];
    let (t, x): (Vec<f64>, Vec<f64>) = window
        .iter()
        .map(|&i| (traj.times[i], positions[i].unwrap()))
        .unzip();
    let speed = linear_fit(&t, &x).map(|(s, _)| s);
    let monotonicity_violations = window
        .iter()
        .map(|&i| violations_ahead(&traj.lambda[i]))
        .max()
        .unwrap_or(0);
    Ok(FrontReport {
        times: traj.times.clone(),
        positions,
        speed,
        monotonicity_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub distance: Vec<f64>,
    pub peak: Vec<f64>,
    pub peak_time: Vec<f64>,
    /// Fraction of adjacent pairs where the peak grows with distance.
    pub peak_violations: f64,
    /// Fraction of adjacent pairs where the peak time shrinks with distance.
    pub time_violations: f64,
}

/// Per-cell maximum of activity and its time, with monotonicity in distance from `source`.
pub fn peak_statistics(traj: &FieldTrajectory, source: &[f64]) -> PeakReport {
    let g = &traj.grid;
    let n = g.len();
    let mut peak = vec![f64::NEG_INFINITY; n];
    let mut peak_time = vec![0.0; n];
    for (row, &t) in traj.lambda.iter().zip(&traj.times) {
        for k in 0..n {
            if row[k] > peak[k] {
                peak[k] = row[k];
                peak_time[k] = t;
            }
        }
    }
    let offset = |k: usize| {
        let c = g.coords(k);
        (0..g.dim)
            .map(|ax| c[ax] - source.get(ax).copied().unwrap_or(0.0))
            .collect::<Vec<f64>>()
    };
    let distance: Vec<f64> = (0..n)
        .map(|k| offset(k).iter().map(|d| d * d).sum::<f64>().sqrt())
        .collect();
    let mut chains: Vec<Vec<usize>> = if g.dim == 1 {
        let right: Vec<usize> = (0..n).filter(|&k| offset(k)[0] >= 0.0).collect();
        let left: Vec<usize> = (0..n).rev().filter(|&k| offset(k)[0] < 0.0).collect();
        vec![right, left]
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.sort_by(|&a, &b| distance[a].total_cmp(&distance[b]));
        vec![all]
    };
    chains.retain(|c| c.len() > 1);
    let (mut pairs, mut pv, mut tv) = (0usize, 0usize, 0usize);
    for chain in &chains {
        for w in chain.windows(2) {
            let (near, far) = (w[0], w[1]);
            pairs += 1;
            if peak[far] > peak[near] * (1.0 + 1e-9) + 1e-12 {
                pv += 1;
            }
            if peak_time[far] < peak_time[near] - 1e-12 {
                tv += 1;
            }
        }
    }
    let frac = |v: usize| {
        if pairs == 0 {
            0.0
        } else {
            v as f64 / pairs as f64
        }
    };
    PeakReport {
        distance,
        peak,
        peak_time,
        peak_violations: frac(pv),
        time_violations: frac(tv),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{integrate_pde, FieldState, PdeParams, PdeStepping, SpatialGrid};
    use crate::shocks::{Shock, ShockSchedule, Site};

    fn fig6(a: f64) -> ModelParams {
        ModelParams {
            z0: 10.0,
            omega: 0.2,
            theta: 0.05,
            eta: 0.01,
            p: 0.5,
            a,
            beta: 1.0,
            alpha_b: 0.5,
            ..ModelParams::default()
        }
    }

    fn synthetic(c: f64, dx: f64) -> FieldTrajectory {
        let grid = SpatialGrid::line(0.0, 40.0, (40.0 / dx).round() as usize).unwrap();
        let xs = grid.xs();
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.2).collect();
        let lambda: Vec<Vec<f64>> = times
            .iter()
            .map(|t| {
                xs.iter()
                    .map(|x| 1.0 / (1.0 + ((x - 5.0 - c * t) / 0.7).exp()))
                    .collect()
            })
            .collect();
        FieldTrajectory {
            grid,
            alpha: lambda.clone(),
            lambda,
            times,
            shock_marks: vec![],
            params: PdeParams::local(ModelParams::default(), 1.0),
            clamps: 0,
        }
    }

    #[test]
    fn fit_line() {
        let (s, b) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn rates_example() {
        let p = ModelParams {
            theta: 0.3,
            eta: 0.01,
            p: 0.7,
            z0: 10.0,
            omega: 0.2,
            ..ModelParams::default()
        };
        let (k1, k2) = decay_rates(&p).unwrap();
        assert!((k1 - 0.29).abs() < 1e-15);
        let oracle = 0.3 / 10.8f64.powf(0.7) - 0.01;
        assert!((k2 - oracle).abs() < 1e-12);
        assert!((k2 - 0.04680).abs() < 1e-4);
    }

    #[test]
    fn frozen_activity_gives_exact_exponential() {
        let p = ModelParams {
            theta: 0.3,
            eta: 0.01,
            p: 0.7,
            z0: 10.0,
            omega: 0.2,
            ..ModelParams::default()
        };
        let grid = SpatialGrid::line(0.0, 20.0, 100).unwrap();
        let sched = ShockSchedule::explicit(vec![Shock::at(0.0, 5.0, Site::Point(vec![10.0]))]);
        let tr = integrate_pde(
            &PdeParams::local(p, 1.0),
            &grid,
            &sched,
            &FieldState::uniform(100, 0.0, 0.0),
            &PdeStepping::new(10.0).stride(100),
        )
        .unwrap();
        let m = mass_diagnostics(&tr).unwrap();
        for (t, a) in m.times.iter().zip(&m.alpha_l1) {
            let exact = 5.0 * (-0.29 * t).exp();
            assert!(((a - exact) / exact).abs() < 1e-6);
        }
        assert!(m.lambda_l1.iter().all(|&x| x == 0.0));
        assert!((m.fitted_rate.unwrap() - 0.29).abs() < 1e-6);
        assert_eq!(m.envelope_ok, Some(true));
        assert_eq!(m.extinction_time(1e-3), Some(0.0));
    }

    #[test]
    fn zero_fields_have_zero_mass() {
        let p = ModelParams {
            theta: 0.3,
            eta: 0.01,
            z0: 10.0,
            omega: 0.2,
            ..ModelParams::default()
        };
        let grid = SpatialGrid::line(0.0, 20.0, 40).unwrap();
        let tr = integrate_pde(
            &PdeParams::local(p, 1.0),
            &grid,
            &ShockSchedule::none(),
            &FieldState::uniform(40, 0.0, 0.0),
            &PdeStepping::new(1.0).stride(100),
        )
        .unwrap();
        let m = mass_diagnostics(&tr).unwrap();
        assert!(m.lambda_l1.iter().chain(&m.alpha_l1).all(|&x| x == 0.0));
    }

    #[test]
    fn fig6_regimes() {
        assert_eq!(steady_states(&fig6(5.0)).unwrap().regime, Regime::Bistable);
        assert_eq!(
            steady_states(&fig6(1.0)).unwrap().regime,
            Regime::Monostable
        );
        let b = regime_boundary(&fig6(0.0), 1.0, 5.0, 1e-6).unwrap();
        assert!(b > 1.0 && b < 5.0);
        let rep = steady_states(&fig6(5.0)).unwrap();
        assert_eq!(rep.states.len(), 3);
        let kappa = 0.19;
        for &(al, l) in &rep.states {
            let p = fig6(5.0);
            assert!((eval_r(al, &p) * eval_g(l, &p) - kappa * l).abs() < 1e-9);
        }
    }

    #[test]
    fn no_base_tension_rest_state_is_origin() {
        let rep = steady_states(&ModelParams {
            alpha_b: 0.0,
            ..fig6(5.0)
        })
        .unwrap();
        assert_eq!(rep.states[0], (0.0, 0.0));
    }

    #[test]
    fn positivity_failure_reported() {
        let p = ModelParams {
            eta: 0.03,
            ..fig6(5.0)
        };
        assert!(matches!(steady_states(&p), Err(Error::Positivity { .. })));
    }

    #[test]
    fn manufactured_front_speed() {
        let tr = synthetic(1.0, 0.05);
        let rep = track_front(&tr, 0.5).unwrap();
        let c = rep.speed.unwrap();
        assert!((c - 1.0).abs() < 0.01, "speed {c}");
        assert_eq!(rep.monotonicity_violations, 0);
    }

    #[test]
    fn stationary_front_has_zero_speed() {
        let mut tr = synthetic(0.0, 0.05);
        for row in &mut tr.lambda {
            row.iter_mut().for_each(|x| *x = 2.0);
        }
        assert!(track_front(&tr, 0.5).unwrap().speed.unwrap().abs() < 1e-12);
    }

    #[test]
    fn no_front_no_speed() {
        let mut tr = synthetic(1.0, 0.05);
        for row in &mut tr.lambda {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
        assert_eq!(track_front(&tr, 0.5).unwrap().speed, None);
    }

    #[test]
    fn uniform_run_has_flat_peaks() {
        let mut tr = synthetic(0.0, 0.5);
        for row in &mut tr.lambda {
            row.iter_mut().for_each(|x| *x = 1.0);
        }
        let rep = peak_statistics(&tr, &[0.0]);
        assert_eq!(rep.peak_violations, 0.0);
        assert_eq!(rep.time_violations, 0.0);
        assert!(rep.peak.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn peaks_both_sides_of_source() {
        let grid = SpatialGrid::line(-5.0, 5.0, 20).unwrap();
        let xs = grid.xs();
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let lambda: Vec<Vec<f64>> = times
            .iter()
            .map(|t| {
                xs.iter()
                    .map(|x| (-(x.abs() - t).powi(2)).exp() / (1.0 + x.abs()))
                    .collect()
            })
            .collect();
        let tr = FieldTrajectory {
            grid,
            alpha: lambda.clone(),
            lambda,
            times,
            shock_marks: vec![],
            params: PdeParams::local(ModelParams::default(), 1.0),
            clamps: 0,
        };
        let rep = peak_statistics(&tr, &[0.0]);
        assert_eq!(rep.peak_violations, 0.0);
        assert_eq!(rep.time_violations, 0.0);
    }
}
