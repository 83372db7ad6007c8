//! Executes a resolved configuration and writes its files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use riot_core::continuum::{
    integrate_pde, mass_diagnostics, peak_statistics, steady_states, track_front, FieldState,
    FieldTrajectory, PdeParams, PdeStepping, SpatialGrid,
};
use riot_core::kernel::{alpha_c, fixed_points, lambda_star, FixedPoints, Stability};
use riot_core::network::{
    activation_times, classify_spread, delay_experiment, double_threshold_scan, grid_graph,
    integrate_network, DelaySpec, Graph, NetStepping, NetTrajectory, NetworkState, Noise,
    SpreadSetup,
};
use riot_core::single_site::{
    check_relaxation, classify_trajectory, hysteresis_sweep, integrate_site, max_activity_window,
    Relaxation, Stepping, Trajectory, MIN_EVENTS, TRANSIENT_FRACTION,
};
use riot_core::{ModelParams, SiteState};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{
    emit_config, ContinuumSpec, Experiment, GraphSpec, Initial, ModelKind, NetworkSpec, RunConfig,
    DEFAULT_DT,
};
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUTPUT_ENV: &str = "RIOTSIM_OUTPUT";
pub const DEFAULT_OUTPUT_ROOT: &str = "riotsim-out";

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";
pub const TRAJECTORY: &str = "trajectory.tsv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Aborted,
}

/// Machine-readable record of one run. Fields are only ever added, with a version bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub name: String,
    pub model: String,
    pub experiment: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub results: Map<String, Value>,
}

impl Summary {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.results.get(key)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.results.get(key).and_then(Value::as_f64)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.results.get(key).and_then(Value::as_str)
    }
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

/// Directory a resolved config writes into.
pub fn run_dir(cfg: &RunConfig, root: &Path) -> PathBuf {
    let out = cfg.output.clone().unwrap_or_else(|| cfg.name.clone());
    let p = PathBuf::from(out);
    if p.is_absolute() {
        p
    } else {
        root.join(p)
    }
}

pub fn site_initial(cfg: &RunConfig) -> CliResult<SiteState> {
    match &cfg.initial {
        Initial::Uniform { lambda, alpha } => Ok(SiteState::new(*lambda, *alpha)),
        other => Err(CliError::Invalid(format!(
            "initial '{other:?}' is not a single-site state"
        ))),
    }
}

pub fn site_stepping(cfg: &RunConfig) -> Stepping {
    let n = &cfg.numerics;
    let mut st = Stepping::new(n.t_end, n.dt.unwrap_or(DEFAULT_DT))
        .method(n.method)
        .stride(n.stride);
    st.perturb = n.perturb;
    st
}

pub fn build_graph(spec: &NetworkSpec) -> CliResult<Graph> {
    Ok(match &spec.graph {
        GraphSpec::Grid { rows, cols, social } => grid_graph(*rows, *cols, social)?,
        GraphSpec::Edges {
            n,
            v_edges,
            c_edges,
        } => Graph::from_edges(*n, v_edges, c_edges)?,
    })
}

pub fn network_initial(cfg: &RunConfig, n: usize) -> CliResult<NetworkState> {
    match &cfg.initial {
        Initial::Uniform { lambda, alpha } => Ok(NetworkState::uniform(n, *lambda, *alpha)),
        Initial::Nodes { lambda, alpha } if lambda.len() == n && alpha.len() == n => {
            Ok(NetworkState {
                lambda: lambda.clone(),
                alpha: alpha.clone(),
            })
        }
        Initial::Nodes { .. } => Err(CliError::Invalid(format!(
            "initial.nodes must list {n} values per field"
        ))),
        other => Err(CliError::Invalid(format!(
            "initial '{other:?}' is not a network state"
        ))),
    }
}

pub fn net_stepping(cfg: &RunConfig) -> NetStepping {
    let n = &cfg.numerics;
    let noise = if cfg.params.sigma > 0.0 {
        Noise::Brownian { seed: n.seed }
    } else {
        Noise::None
    };
    let mut st = NetStepping::new(n.t_end, n.dt.unwrap_or(DEFAULT_DT))
        .stride(n.stride)
        .noise(noise);
    st.eta_alpha = cfg.network.as_ref().and_then(|s| s.eta_alpha);
    st
}

fn continuum(cfg: &RunConfig) -> CliResult<&ContinuumSpec> {
    cfg.continuum
        .as_ref()
        .ok_or_else(|| CliError::Invalid("continuum section missing".into()))
}

pub fn pde_params(cfg: &RunConfig) -> CliResult<PdeParams> {
    let c = continuum(cfg)?;
    let nonlocal = if cfg.model == ModelKind::PdeNonlocal {
        c.nonlocal.clone()
    } else {
        None
    };
    Ok(PdeParams {
        model: cfg.params,
        d: c.d,
        nonlocal,
        deposit: c.deposit,
    })
}

pub fn pde_grid(cfg: &RunConfig) -> CliResult<SpatialGrid> {
    continuum(cfg)?.grid()
}

pub fn pde_initial(cfg: &RunConfig, grid: &SpatialGrid) -> CliResult<FieldState> {
    match &cfg.initial {
        Initial::Uniform { lambda, alpha } => Ok(FieldState::uniform(grid.len(), *lambda, *alpha)),
        Initial::Exponential { amplitude, rate } => Ok(FieldState::from_fn(grid, |[x, _]| {
            (amplitude * (-rate * x).exp(), 0.0)
        })),
        Initial::Front { until } => {
            let rep = steady_states(&cfg.params)?;
            let (a1, l1) = rep.states[0];
            let (a2, l2) = *rep.states.last().unwrap();
            Ok(FieldState::from_fn(grid, |[x, _]| {
                if x < *until {
                    (l2, a2)
                } else {
                    (l1, a1)
                }
            }))
        }
        Initial::Nodes { .. } => Err(CliError::Invalid("initial.nodes is for networks".into())),
    }
}

pub fn pde_stepping(cfg: &RunConfig) -> PdeStepping {
    let n = &cfg.numerics;
    let st = PdeStepping::new(n.t_end).stride(n.stride);
    match n.dt {
        Some(dt) => st.dt(dt),
        None => st,
    }
}

pub struct Files<'a> {
    dir: &'a Path,
    pub names: Vec<String>,
}

impl Files<'_> {
    pub fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> CliResult<()> {
        let mut w = BufWriter::new(fs::File::create(self.dir.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.names.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, v: &Value) -> CliResult<()> {
        let text = serde_json::to_string_pretty(v)?;
        self.write(name, |w| writeln!(w, "{text}"))
    }
}

fn schema(columns: &[(&str, &str)]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "format": "whitespace-separated text, one header row, floats at 17 significant digits",
        "columns": columns.iter().map(|(n, d)| json!({"name": n, "description": d})).collect::<Vec<_>>(),
    })
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
        Stability::Saddle => "saddle",
        Stability::Marginal => "marginal",
    }
}

fn fixed_point_json(fp: &FixedPoints) -> Value {
    json!({
        "degenerate": fp.degenerate,
        "points": fp.points.iter().map(|p| json!({
            "lambda": p.state.lambda,
            "alpha": p.state.alpha,
            "stability": stability_name(p.stability),
        })).collect::<Vec<_>>(),
    })
}

/// Inserts a serializable value under `key`.
fn put<T: Serialize>(r: &mut Map<String, Value>, key: &str, v: T) {
    r.insert(
        key.to_string(),
        serde_json::to_value(v).unwrap_or(Value::Null),
    );
}

fn model_results(p: &ModelParams, r: &mut Map<String, Value>) {
    if let Ok(ls) = lambda_star(p) {
        put(r, "lambda_star", ls);
    }
    if let Ok(ac) = alpha_c(p) {
        put(r, "alpha_c", ac);
    }
    put(r, "excitability_hypothesis", p.excitability_hypothesis());
}

/// Resolves, runs and records. Integration failures produce an aborted summary.
pub fn run(cfg: &RunConfig, dir: &Path) -> CliResult<Summary> {
    let cfg = cfg.clone().resolve()?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join(RESOLVED_CONFIG), emit_config(&cfg)?)?;
    let started = Instant::now();
    let mut files = Files {
        dir,
        names: vec![RESOLVED_CONFIG.to_string()],
    };
    let mut results = Map::new();
    let mut warnings = cfg.params.warnings(cfg.model.is_pde());
    let outcome = execute(&cfg, &mut files, &mut results, &mut warnings);
    let (status, error) = match outcome {
        Ok(()) => (Status::Ok, None),
        Err(e) => (Status::Aborted, Some(e.to_string())),
    };
    let mut names = files.names;
    names.push(SUMMARY.to_string());
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        model: cfg.model.name().to_string(),
        experiment: cfg.experiment.name().to_string(),
        status,
        error,
        wall_time_s: started.elapsed().as_secs_f64(),
        files: names,
        warnings,
        results,
    };
    fs::write(
        dir.join(SUMMARY),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(summary)
}

fn execute(
    cfg: &RunConfig,
    files: &mut Files,
    r: &mut Map<String, Value>,
    warnings: &mut Vec<String>,
) -> CliResult<()> {
    model_results(&cfg.params, r);
    match cfg.model {
        ModelKind::Site => run_site(cfg, files, r, warnings),
        ModelKind::Network => run_network(cfg, files, r, warnings),
        ModelKind::PdeLocal | ModelKind::PdeNonlocal => run_pde(cfg, files, r, warnings),
    }
}

pub fn write_site(traj: &Trajectory, files: &mut Files) -> CliResult<()> {
    files.write(TRAJECTORY, |w| traj.write_columns(w))?;
    files.json(
        "trajectory.schema.json",
        &schema(&[
            ("t", "time"),
            ("lambda", "activity"),
            ("alpha", "tension"),
            ("shock_flag", "1 on the sample taken right after a shock"),
        ]),
    )
}

/// Relaxation and window measurements of a single-site run.
pub fn relaxation_results(traj: &Trajectory, eps: f64) -> Value {
    match check_relaxation(traj, eps) {
        Relaxation::Relaxed { relaxed_at } => json!({"relaxed": true, "relaxed_at": relaxed_at}),
        Relaxation::NotRelaxed => json!({"relaxed": false}),
    }
}

fn run_site(
    cfg: &RunConfig,
    files: &mut Files,
    r: &mut Map<String, Value>,
    warnings: &mut Vec<String>,
) -> CliResult<()> {
    let p = &cfg.params;
    put(r, "fixed_points", fixed_point_json(&fixed_points(p)?));
    if let Experiment::Hysteresis { lo, hi, points } = cfg.experiment {
        if points < 2 {
            return Err(CliError::Invalid(
                "hysteresis needs at least 2 points".into(),
            ));
        }
        let grid: Vec<f64> = (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect();
        let rep = hysteresis_sweep(p, &grid)?;
        files.write("hysteresis.tsv", |w| {
            writeln!(w, "alpha_b theta_alpha_b n_points n_stable lambda_values")?;
            for row in &rep.rows {
                let stable = row
                    .points
                    .iter()
                    .filter(|f| f.stability == Stability::Stable)
                    .count();
                let ls: Vec<String> = row
                    .points
                    .iter()
                    .map(|f| format!("{:.16e}", f.state.lambda))
                    .collect();
                writeln!(
                    w,
                    "{:.16e} {:.16e} {} {} {}",
                    row.alpha_b,
                    p.theta * row.alpha_b,
                    row.points.len(),
                    stable,
                    ls.join(",")
                )?;
            }
            Ok(())
        })?;
        put(r, "fold", rep.fold.is_some());
        if let Some(f) = rep.fold {
            put(r, "alpha_b1", f.alpha_b1);
            put(r, "alpha_b2", f.alpha_b2);
            put(r, "theta_alpha_b1", p.theta * f.alpha_b1);
            put(r, "theta_alpha_b2", p.theta * f.alpha_b2);
        }
    }
    let st = site_stepping(cfg);
    let traj = integrate_site(p, &cfg.schedule, site_initial(cfg)?, &st)?;
    warnings.extend(traj.warnings.iter().cloned());
    write_site(&traj, files)?;
    let lam = traj.lambda();
    let last = traj.states.last().copied().unwrap_or_default();
    put(r, "max_lambda", lam.iter().cloned().fold(0.0, f64::max));
    put(r, "final_lambda", last.lambda);
    put(r, "final_alpha", last.alpha);
    put(r, "clamps", traj.clamps);
    put(r, "shocks", traj.shock_marks.len());
    let ls = lambda_star(p)?;
    match &cfg.experiment {
        Experiment::Relaxation { eps } => {
            if let Value::Object(m) = relaxation_results(&traj, *eps) {
                r.extend(m);
            }
        }
        Experiment::Window { delta_fraction } => {
            let w = max_activity_window(&traj, delta_fraction * ls)?;
            put(r, "window_length", w.map_or(0.0, |w| w.length()));
            if let Some(w) = w {
                put(r, "window_start", w.start);
                put(r, "window_end", w.end);
            }
        }
        Experiment::Forced { delta_fraction } => {
            let rate = cfg.schedule.event_rate().ok_or_else(|| {
                CliError::Invalid("forced needs a periodic or poisson schedule".into())
            })?;
            if rate * st.t_end < MIN_EVENTS {
                return Err(riot_core::Error::Insufficient(format!(
                    "horizon covers {:.1} events, at least {MIN_EVENTS} required",
                    rate * st.t_end
                ))
                .into());
            }
            let regime =
                classify_trajectory(&traj, st.t_end * TRANSIENT_FRACTION, delta_fraction * ls)?;
            if let Value::Object(m) = serde_json::to_value(regime)? {
                r.extend(m);
            }
            put(r, "frequency", rate);
        }
        _ => {}
    }
    Ok(())
}

pub fn write_network(traj: &NetTrajectory, files: &mut Files) -> CliResult<()> {
    files.write(TRAJECTORY, |w| traj.write_columns(w))?;
    files.json(
        "trajectory.schema.json",
        &schema(&[
            ("t", "time"),
            ("node", "node index"),
            ("lambda", "activity"),
            ("alpha", "tension"),
        ]),
    )
}

fn run_network(
    cfg: &RunConfig,
    files: &mut Files,
    r: &mut Map<String, Value>,
    warnings: &mut Vec<String>,
) -> CliResult<()> {
    let spec = cfg
        .network
        .as_ref()
        .ok_or_else(|| CliError::Invalid("network section missing".into()))?;
    let graph = build_graph(spec)?;
    let init = network_initial(cfg, graph.n)?;
    let st = net_stepping(cfg);
    let p = &cfg.params;
    let traj = integrate_network(&graph, p, &cfg.schedule, &init, &st)?;
    warnings.extend(traj.warnings.iter().cloned());
    write_network(&traj, files)?;
    let fraction = match cfg.experiment {
        Experiment::Spread {
            threshold_fraction, ..
        }
        | Experiment::DoubleThreshold {
            threshold_fraction, ..
        }
        | Experiment::Delay {
            threshold_fraction, ..
        } => threshold_fraction,
        _ => 0.2,
    };
    let act = activation_times(&traj, fraction)?;
    put(r, "nodes", graph.n);
    put(r, "activated", act.iter().filter(|t| t.is_finite()).count());
    put(r, "total_activity", traj.total_activity(0.0));
    put(
        r,
        "max_lambda",
        traj.lambda.iter().flatten().cloned().fold(0.0, f64::max),
    );
    put(r, "clamps", traj.clamps);
    put(r, "min_raw", traj.min_raw);
    match &cfg.experiment {
        Experiment::Spread {
            seed_node,
            threshold_fraction,
        } => {
            let s = classify_spread(
                &traj,
                &graph,
                *seed_node,
                *threshold_fraction,
                st.tolerance(),
            )?;
            put(r, "spread", s);
        }
        Experiment::DoubleThreshold {
            seed_node,
            amplitudes,
            threshold_fraction,
        } => {
            let setup = SpreadSetup {
                graph: graph.clone(),
                params: *p,
                initial: init.clone(),
                stepping: st,
                seed_node: *seed_node,
                threshold_fraction: *threshold_fraction,
                tol: None,
            };
            let scan = double_threshold_scan(&setup, amplitudes)?;
            files.write("thresholds.tsv", |w| {
                writeln!(w, "amplitude spread")?;
                for (a, c) in &scan.classes {
                    writeln!(
                        w,
                        "{a:.16e} {}",
                        serde_json::to_value(c).unwrap().as_str().unwrap_or("")
                    )?;
                }
                Ok(())
            })?;
            put(
                r,
                "classes",
                scan.classes
                    .iter()
                    .map(|(a, c)| json!({"amplitude": a, "spread": c}))
                    .collect::<Vec<_>>(),
            );
            put(r, "a1", scan.a1.map(|(lo, hi)| vec![lo, hi]));
            put(r, "a_star", scan.a_star.map(|(lo, hi)| vec![lo, hi]));
            put(r, "monotone", scan.monotone);
            put(r, "flags", &scan.flags);
        }
        Experiment::Delay {
            first_node,
            first_amplitude,
            second_node,
            second_amplitude,
            second_time,
            threshold_fraction,
        } => {
            let spec = DelaySpec {
                first_node: *first_node,
                first_amplitude: *first_amplitude,
                second_node: *second_node,
                second_amplitude: *second_amplitude,
                second_time: *second_time,
            };
            let rep = delay_experiment(&graph, p, &init, &st, &spec, *threshold_fraction)?;
            put(r, "single", rep.single);
            put(r, "double", rep.double);
            put(r, "ratio_after", rep.ratio_after);
            put(r, "dominates", rep.dominates);
        }
        Experiment::Steady => put(r, "fixed_points", fixed_point_json(&fixed_points(p)?)),
        _ => {}
    }
    Ok(())
}

pub fn write_field(traj: &FieldTrajectory, files: &mut Files) -> CliResult<()> {
    files.write(TRAJECTORY, |w| traj.write_columns(w))?;
    let cols: &[(&str, &str)] = if traj.grid.dim == 1 {
        &[
            ("t", "time"),
            ("x", "cell center"),
            ("lambda", "activity"),
            ("alpha", "tension"),
        ]
    } else {
        &[
            ("t", "time"),
            ("x", "cell center"),
            ("y", "cell center"),
            ("lambda", "activity"),
            ("alpha", "tension"),
        ]
    };
    files.json("trajectory.schema.json", &schema(cols))
}

/// Mass, front and peak analyses shared by `run` and `analyze`.
pub fn field_analysis(
    kind: &Experiment,
    traj: &FieldTrajectory,
    files: &mut Files,
    r: &mut Map<String, Value>,
) -> CliResult<()> {
    let p = &traj.params.model;
    match kind {
        Experiment::Mass => {
            let m = mass_diagnostics(traj)?;
            files.write("mass.tsv", |w| {
                writeln!(w, "t lambda_l1 alpha_l1")?;
                for i in 0..m.times.len() {
                    writeln!(
                        w,
                        "{:.16e} {:.16e} {:.16e}",
                        m.times[i], m.lambda_l1[i], m.alpha_l1[i]
                    )?;
                }
                Ok(())
            })?;
            let ls = lambda_star(p)?;
            let domain = traj.grid.cell_measure() * traj.grid.len() as f64;
            put(r, "k1", m.k1);
            put(r, "k2", m.k2);
            put(r, "fitted_rate", m.fitted_rate);
            put(r, "rate_in_bounds", m.rate_in_bounds);
            put(r, "envelope_excess", m.envelope_excess);
            put(r, "envelope_ok", m.envelope_ok);
            put(r, "extinction_time", m.extinction_time(1e-3 * domain * ls));
            put(r, "mass_flags", &m.flags);
        }
        Experiment::Front { thresholds } => {
            let ls = lambda_star(p)?;
            let reports = thresholds
                .iter()
                .map(|f| track_front(traj, f * ls))
                .collect::<riot_core::Result<Vec<_>>>()?;
            files.write("front.tsv", |w| {
                let head: Vec<String> = thresholds.iter().map(|f| format!("x_f_{f}")).collect();
                writeln!(w, "t {}", head.join(" "))?;
                for i in 0..traj.times.len() {
                    let xs: Vec<String> = reports
                        .iter()
                        .map(|rep| {
                            rep.positions[i].map_or("nan".to_string(), |x| format!("{x:.16e}"))
                        })
                        .collect();
                    writeln!(w, "{:.16e} {}", traj.times[i], xs.join(" "))?;
                }
                Ok(())
            })?;
            let speeds: Vec<Option<f64>> = reports.iter().map(|rep| rep.speed).collect();
            put(r, "thresholds", thresholds);
            put(r, "speeds", &speeds);
            put(r, "speed", speeds.first().copied().flatten());
            put(
                r,
                "monotonicity_violations",
                reports
                    .iter()
                    .map(|rep| rep.monotonicity_violations)
                    .max()
                    .unwrap_or(0),
            );
            if let (Some(Some(a)), Some(Some(b))) = (speeds.first(), speeds.last()) {
                put(r, "speed_spread", (a - b).abs() / a.abs().max(b.abs()));
            }
        }
        Experiment::Peaks { source } => {
            let pk = peak_statistics(traj, source);
            files.write("peaks.tsv", |w| {
                writeln!(w, "x y distance peak peak_time")?;
                for k in 0..pk.peak.len() {
                    let [x, y] = traj.grid.coords(k);
                    writeln!(
                        w,
                        "{x:.16e} {y:.16e} {:.16e} {:.16e} {:.16e}",
                        pk.distance[k], pk.peak[k], pk.peak_time[k]
                    )?;
                }
                Ok(())
            })?;
            put(r, "peak_violations", pk.peak_violations);
            put(r, "time_violations", pk.time_violations);
        }
        _ => {}
    }
    Ok(())
}

fn run_pde(
    cfg: &RunConfig,
    files: &mut Files,
    r: &mut Map<String, Value>,
    warnings: &mut Vec<String>,
) -> CliResult<()> {
    let grid = pde_grid(cfg)?;
    let params = pde_params(cfg)?;
    let init = pde_initial(cfg, &grid)?;
    let st = pde_stepping(cfg);
    match steady_states(&cfg.params) {
        Ok(rep) => {
            put(r, "regime", rep.regime);
            put(r, "states", &rep.states);
            put(r, "condition_lhs", rep.condition_lhs);
            put(r, "condition_rhs", rep.condition_rhs);
        }
        Err(e) if matches!(cfg.experiment, Experiment::Steady) => return Err(e.into()),
        Err(e) => warnings.push(format!("constant states unavailable: {e}")),
    }
    let traj = integrate_pde(&params, &grid, &cfg.schedule, &init, &st)?;
    if traj.clamps > 0 {
        warnings.push(format!("{} negative values clamped", traj.clamps));
    }
    write_field(&traj, files)?;
    let last = traj.lambda.len() - 1;
    put(r, "dt", st.resolve_dt(&grid, params.d)?);
    put(r, "cells", grid.len());
    put(
        r,
        "max_lambda",
        traj.lambda.iter().flatten().cloned().fold(0.0, f64::max),
    );
    put(r, "final_lambda_l1", grid.l1(&traj.lambda[last]));
    put(r, "final_alpha_l1", grid.l1(&traj.alpha[last]));
    put(r, "clamps", traj.clamps);
    field_analysis(&cfg.experiment, &traj, files, r)
}

/// Writes a field analysis for an existing trajectory directory.
pub fn analysis_files(dir: &Path) -> Files<'_> {
    Files {
        dir,
        names: Vec::new(),
    }
}
