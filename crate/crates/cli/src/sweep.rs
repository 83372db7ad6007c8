//! Parallel one-axis parameter sweeps.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{apply_overrides, RunConfig};
use crate::error::{CliError, CliResult};
use crate::runner::{run, Status, Summary};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    pub columns: Vec<String>,
}

impl SweepReport {
    /// Column of scalar results in input order.
    pub fn column(&self, key: &str) -> Vec<Option<Value>> {
        self.rows
            .iter()
            .map(|r| r.summary.as_ref().and_then(|s| s.get(key).cloned()))
            .collect()
    }
}

/// Splits a comma-separated list into TOML values.
pub fn parse_values(raw: &str) -> CliResult<Vec<toml::Value>> {
    let vals: Vec<toml::Value> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(crate::config::parse_value)
        .collect();
    if vals.is_empty() {
        return Err(CliError::Invalid("sweep needs at least one value".into()));
    }
    Ok(vals)
}

fn label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Runs `base` once per value of `axis`. Failed rows are marked; the others complete.
pub fn sweep(
    base: &RunConfig,
    axis: &str,
    values: &[toml::Value],
    dir: &Path,
) -> CliResult<SweepReport> {
    if values.is_empty() {
        return Err(CliError::Invalid("sweep needs at least one value".into()));
    }
    fs::create_dir_all(dir)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let value = label(v);
            let outcome =
                apply_overrides(base, &[(axis.to_string(), v.clone())]).and_then(|mut cfg| {
                    cfg.name = format!("{}[{axis}={value}]", base.name);
                    cfg.output = None;
                    run(&cfg, &dir.join(format!("{i:03}_{axis}={value}")))
                });
            match outcome {
                Ok(s) => SweepRow {
                    value,
                    status: if s.status == Status::Ok {
                        "ok".into()
                    } else {
                        "aborted".into()
                    },
                    error: s.error.clone(),
                    summary: Some(s),
                },
                Err(e) => SweepRow {
                    value,
                    status: "error".into(),
                    error: Some(e.to_string()),
                    summary: None,
                },
            }
        })
        .collect();
    let mut columns = BTreeSet::new();
    for s in rows.iter().filter_map(|r| r.summary.as_ref()) {
        columns.extend(
            s.results
                .iter()
                .filter(|(_, v)| scalar(v).is_some())
                .map(|(k, _)| k.clone()),
        );
    }
    let report = SweepReport {
        axis: axis.to_string(),
        rows,
        columns: columns.into_iter().collect(),
    };
    write_table(&report, &mut fs::File::create(dir.join("sweep.tsv"))?)?;
    fs::write(
        dir.join("sweep.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    Ok(report)
}

/// Tab-separated table, one row per value in input order.
pub fn write_table<W: Write>(report: &SweepReport, w: &mut W) -> CliResult<()> {
    let mut head = vec![report.axis.clone(), "status".to_string()];
    head.extend(report.columns.iter().cloned());
    writeln!(w, "{}", head.join("\t"))?;
    for row in &report.rows {
        let mut cells = vec![row.value.clone(), row.status.clone()];
        for c in &report.columns {
            let cell = row
                .summary
                .as_ref()
                .and_then(|s| s.get(c))
                .and_then(scalar)
                .unwrap_or_else(|| "-".into());
            cells.push(cell);
        }
        writeln!(w, "{}", cells.join("\t"))?;
    }
    Ok(())
}
