//! Post-hoc analysis of a written trajectory file.

use std::fs;
use std::path::Path;

use riot_core::continuum::FieldTrajectory;
use riot_core::single_site::Trajectory;
use riot_core::SiteState;
use serde_json::{Map, Value};

use crate::config::{parse_config, Experiment, ModelKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::runner::{
    analysis_files, field_analysis, pde_grid, pde_params, relaxation_results, RESOLVED_CONFIG,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AnalysisKind {
    Relaxation,
    Front,
    Peaks,
    Mass,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Relaxation => "relaxation",
            AnalysisKind::Front => "front",
            AnalysisKind::Peaks => "peaks",
            AnalysisKind::Mass => "mass",
        }
    }
}

fn rows(text: &str, width: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Analyze(format!("line {}: {e}", i + 1)))?;
        if vals.len() != width {
            return Err(CliError::Analyze(format!(
                "line {}: expected {width} columns, found {}",
                i + 1,
                vals.len()
            )));
        }
        out.push(vals);
    }
    Ok(out)
}

pub fn read_site(text: &str, cfg: &RunConfig) -> CliResult<Trajectory> {
    let data = rows(text, 4)?;
    Ok(Trajectory {
        times: data.iter().map(|r| r[0]).collect(),
        states: data.iter().map(|r| SiteState::new(r[1], r[2])).collect(),
        shock_marks: data
            .iter()
            .enumerate()
            .filter(|(_, r)| r[3] == 1.0)
            .map(|(i, _)| i)
            .collect(),
        params: cfg.params,
        clamps: 0,
        warnings: Vec::new(),
    })
}

pub fn read_field(text: &str, cfg: &RunConfig) -> CliResult<FieldTrajectory> {
    let grid = pde_grid(cfg)?;
    let params = pde_params(cfg)?;
    let n = grid.len();
    let data = rows(text, grid.dim + 3)?;
    if data.len() % n != 0 {
        return Err(CliError::Analyze(format!(
            "{} rows is not a multiple of {n} cells",
            data.len()
        )));
    }
    let (mut times, mut lambda, mut alpha) = (Vec::new(), Vec::new(), Vec::new());
    for frame in data.chunks(n) {
        times.push(frame[0][0]);
        lambda.push(frame.iter().map(|r| r[grid.dim + 1]).collect());
        alpha.push(frame.iter().map(|r| r[grid.dim + 2]).collect());
    }
    let shock_times: Vec<f64> = cfg
        .schedule
        .realize_seeded(cfg.numerics.t_end)?
        .iter()
        .map(|s| s.time)
        .collect();
    let shock_marks = shock_times
        .iter()
        .filter_map(|&s| times.iter().position(|&t| t >= s - 1e-9))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(FieldTrajectory {
        grid,
        times,
        lambda,
        alpha,
        shock_marks,
        params,
        clamps: 0,
    })
}

/// Runs `kind` on a trajectory written by `run`, using the resolved config beside it.
pub fn analyze(path: &Path, kind: AnalysisKind) -> CliResult<Value> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let cfg_path = dir.join(RESOLVED_CONFIG);
    let cfg_text = fs::read_to_string(&cfg_path)
        .map_err(|e| CliError::Analyze(format!("{}: {e}", cfg_path.display())))?;
    let cfg = parse_config(&cfg_text)?;
    let text = fs::read_to_string(path)?;
    let mut r = Map::new();
    r.insert("kind".into(), Value::from(kind.name()));
    match (kind, cfg.model) {
        (AnalysisKind::Relaxation, ModelKind::Site) => {
            let traj = read_site(&text, &cfg)?;
            if let Value::Object(m) = relaxation_results(&traj, 1e-3) {
                r.extend(m);
            }
        }
        (AnalysisKind::Relaxation, m) => {
            return Err(CliError::Analyze(format!(
                "relaxation needs a site trajectory, got {}",
                m.name()
            )))
        }
        (k, m) if !m.is_pde() => {
            return Err(CliError::Analyze(format!(
                "{} needs a field trajectory, got {}",
                k.name(),
                m.name()
            )))
        }
        (k, _) => {
            let traj = read_field(&text, &cfg)?;
            let exp = match k {
                AnalysisKind::Mass => Experiment::Mass,
                AnalysisKind::Front => match &cfg.experiment {
                    e @ Experiment::Front { .. } => e.clone(),
                    _ => Experiment::Front {
                        thresholds: vec![0.3, 0.5],
                    },
                },
                _ => match &cfg.experiment {
                    e @ Experiment::Peaks { .. } => e.clone(),
                    _ => Experiment::Peaks {
                        source: first_shock_point(&cfg),
                    },
                },
            };
            let mut files = analysis_files(dir);
            field_analysis(&exp, &traj, &mut files, &mut r)?;
            r.insert("files".into(), Value::from(files.names));
        }
    }
    let v = Value::Object(r);
    fs::write(
        dir.join(format!("analysis-{}.json", kind.name())),
        serde_json::to_string_pretty(&v)? + "\n",
    )?;
    Ok(v)
}

fn first_shock_point(cfg: &RunConfig) -> Vec<f64> {
    cfg.schedule
        .realize_seeded(cfg.numerics.t_end)
        .ok()
        .and_then(|s| s.into_iter().next())
        .and_then(|s| match s.site {
            riot_core::shocks::Site::Point(p) => Some(p),
            _ => None,
        })
        .unwrap_or_else(|| vec![0.0])
}
