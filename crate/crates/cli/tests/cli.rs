use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use riot_cli::config::{apply_overrides, emit_config, parse_config, parse_override, Experiment};
use riot_cli::presets::{preset, PRESETS};
use riot_cli::runner::{run, Status, RESOLVED_CONFIG, SUMMARY, TRAJECTORY};
use riot_cli::sweep::{parse_values, sweep};
use riot_cli::CliError;
use riot_core::kernel::lambda_star;
use riot_core::shocks::{AmplitudeLaw, ShockSchedule, Site};
use serde_json::Value;

fn riotsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riotsim"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn column(tsv: &str, col: usize) -> Vec<f64> {
    tsv.lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(col).unwrap().parse().unwrap())
        .collect()
}

const MINIMAL: &str = r#"
name = "tiny"
model = "site"

[schedule]
kind = "explicit"

[[schedule.shocks]]
time = 0.0
amplitude = 4.0

[numerics]
t_end = 20.0
"#;

#[test]
fn minimal_config_resolves_all_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(MINIMAL).unwrap();
    let s = run(&cfg, dir.path()).unwrap();
    assert_eq!(s.status, Status::Ok);
    let echoed = fs::read_to_string(dir.path().join(RESOLVED_CONFIG)).unwrap();
    for key in [
        "[params]",
        "omega",
        "decay_form",
        "[initial]",
        "dt",
        "stride",
        "seed",
        "method",
    ] {
        assert!(
            echoed.contains(key),
            "resolved config lacks {key}:\n{echoed}"
        );
    }
    let back = parse_config(&echoed).unwrap();
    assert_eq!(back, cfg.resolve().unwrap());
}

#[test]
fn parse_error_reports_line() {
    let text = "name = \"x\"\nmodel = \"site\"\n\n[params]\ntheta = \"high\"\n";
    match parse_config(text) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, Some(5)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_key_rejected() {
    let text = "model = \"site\"\n[params]\nthetta = 0.2\n";
    let err = parse_config(text).unwrap_err();
    assert!(
        matches!(err, CliError::Parse { line: Some(_), .. }),
        "{err}"
    );
    assert!(err.to_string().contains("thetta"), "{err}");
}

#[test]
fn invalid_parameter_names_the_invariant() {
    let err = parse_config("model = \"site\"\n[params]\ntheta = -1.0\n").unwrap_err();
    assert!(err.to_string().contains("theta"), "{err}");
}

#[test]
fn cfl_violation_names_the_bound() {
    let mut text = emit_config(&preset("pde-bump").unwrap()).unwrap();
    text = text.replace("[numerics]\n", "[numerics]\ndt = 0.5\n");
    let err = parse_config(&text).and_then(|c| c.resolve()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("CFL bound"), "{msg}");
    assert!(msg.contains("0.5"), "{msg}");
}

#[test]
fn every_preset_round_trips_through_text() {
    for name in PRESETS {
        let cfg = preset(name).unwrap();
        assert_eq!(
            parse_config(&emit_config(&cfg).unwrap()).unwrap(),
            cfg,
            "{name}"
        );
    }
}

#[test]
fn slow_preset_single_burst_then_monotone_decay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("fig-slow").unwrap().resolve().unwrap();
    let s = run(&cfg, dir.path()).unwrap();
    assert_eq!(s.status, Status::Ok);
    let tsv = fs::read_to_string(dir.path().join(TRAJECTORY)).unwrap();
    let lambda = column(&tsv, 1);
    let high = 0.5 * lambda_star(&cfg.params).unwrap();
    let rises = lambda
        .windows(2)
        .filter(|w| w[0] < high && w[1] >= high)
        .count();
    assert_eq!(rises, 1);
    let peak = lambda
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(lambda[peak] > 0.9 * lambda_star(&cfg.params).unwrap());
    assert!(lambda[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(*lambda.last().unwrap() < 1e-6);
}

#[test]
fn double_threshold_summary_has_brackets() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("network-double-threshold").unwrap();
    if let Experiment::DoubleThreshold { amplitudes, .. } = &mut cfg.experiment {
        *amplitudes = vec![2.0, 6.0, 10.0];
    }
    let s = run(&cfg.resolve().unwrap(), dir.path()).unwrap();
    assert_eq!(s.status, Status::Ok);
    for key in ["a1", "a_star", "classes", "monotone"] {
        assert!(s.get(key).is_some(), "missing {key}: {:?}", s.results);
    }
    assert!(s.files.iter().any(|f| f == "thresholds.tsv"));
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig-periodic").unwrap();
    cfg.schedule = ShockSchedule::Poisson {
        rate: 0.5,
        amplitude: AmplitudeLaw::Exponential { mean: 2.0 },
        site: Site::Local,
        seed: 3,
    };
    cfg.experiment = Experiment::None;
    cfg.numerics.t_end = 150.0;
    for name in PRESETS
        .iter()
        .filter(|n| n.starts_with("fig"))
        .map(|n| preset(n).unwrap())
        .chain([cfg])
    {
        let cfg = name.with_seed(9).resolve().unwrap();
        run(&cfg, a.path()).unwrap();
        run(&cfg, b.path()).unwrap();
        let fa = fs::read(a.path().join(TRAJECTORY)).unwrap();
        let fb = fs::read(b.path().join(TRAJECTORY)).unwrap();
        assert!(fa == fb, "{}", cfg.name);
    }
}

#[test]
fn seeded_network_cli_runs_are_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    let dirs = ["a", "b", "c"].map(|d| root.path().join(d));
    let args = |seed: &'static str| {
        vec![
            "--seed",
            seed,
            "preset",
            "net-delay",
            "--override",
            "params.sigma=0.05",
            "--override",
            "numerics.t_end=10.0",
            "--override",
            "experiment={ kind = \"none\" }",
        ]
    };
    for (d, seed) in dirs.iter().zip(["4", "4", "5"]) {
        let out = riotsim(d, &args(seed));
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let read = |d: &Path| fs::read(d.join("net-delay").join(TRAJECTORY)).unwrap();
    assert_eq!(read(&dirs[0]), read(&dirs[1]));
    assert_ne!(read(&dirs[0]), read(&dirs[2]));
}

fn periodic_template(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("periodic.toml");
    fs::write(
        &path,
        emit_config(&preset("fig-periodic").unwrap()).unwrap(),
    )
    .unwrap();
    path
}

#[test]
fn frequency_sweep_flips_once() {
    let root = tempfile::tempdir().unwrap();
    let cfg = parse_config(&fs::read_to_string(periodic_template(root.path())).unwrap()).unwrap();
    let report = sweep(
        &cfg,
        "schedule.frequency",
        &parse_values("0.1, 0.2, 0.5").unwrap(),
        root.path(),
    )
    .unwrap();
    assert_eq!(
        report
            .rows
            .iter()
            .map(|r| r.value.as_str())
            .collect::<Vec<_>>(),
        ["0.1", "0.2", "0.5"]
    );
    let regimes: Vec<String> = report
        .column("regime")
        .into_iter()
        .map(|v| v.unwrap().as_str().unwrap().to_string())
        .collect();
    assert_eq!(regimes.first().unwrap(), "decaying");
    assert_eq!(regimes.last().unwrap(), "sustained");
    assert_eq!(
        regimes.windows(2).filter(|w| w[0] != w[1]).count(),
        1,
        "{regimes:?}"
    );
    let table = fs::read_to_string(root.path().join("sweep.tsv")).unwrap();
    assert!(table
        .lines()
        .next()
        .unwrap()
        .starts_with("schedule.frequency\tstatus"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn amplitude_sweep_fills_spread_column_in_order() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = preset("net-double-threshold").unwrap();
    cfg.experiment = Experiment::Spread {
        seed_node: 44,
        threshold_fraction: 0.2,
    };
    let report = sweep(
        &cfg,
        "schedule.shocks.0.amplitude",
        &parse_values("2,6,10").unwrap(),
        root.path(),
    )
    .unwrap();
    let rank = |s: &str| {
        ["contained", "local", "nonlocal"]
            .iter()
            .position(|c| *c == s)
            .unwrap()
    };
    let spread: Vec<usize> = report
        .column("spread")
        .into_iter()
        .map(|v| rank(v.unwrap().as_str().unwrap()))
        .collect();
    assert_eq!(spread.len(), 3);
    assert!(spread.windows(2).all(|w| w[0] <= w[1]), "{spread:?}");
}

#[test]
fn sweep_marks_failed_rows_and_continues() {
    let root = tempfile::tempdir().unwrap();
    let cfg = parse_config(MINIMAL).unwrap();
    let report = sweep(
        &cfg,
        "params.theta",
        &parse_values("0.5, -1, 0.7").unwrap(),
        root.path(),
    )
    .unwrap();
    let status: Vec<&str> = report.rows.iter().map(|r| r.status.as_str()).collect();
    assert_eq!(status, ["ok", "error", "ok"]);
    assert!(report.rows[1].error.as_ref().unwrap().contains("theta"));
}

#[test]
fn empty_sweep_rejected() {
    assert!(parse_values("").is_err());
    assert!(parse_values(" , ").is_err());
    let root = tempfile::tempdir().unwrap();
    let cfg = periodic_template(root.path());
    let out = riotsim(
        root.path(),
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--axis",
            "params.theta",
            "--values",
            "",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_root_from_environment() {
    let root = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_riotsim"))
        .env("RIOTSIM_OUTPUT", root.path())
        .args(["preset", "fig-fast", "--override", "numerics.t_end=5.0"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value = serde_json::from_str(
        &fs::read_to_string(root.path().join("fig-fast").join(SUMMARY)).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["status"], "ok");
}

#[test]
fn run_subcommand_and_exit_codes() {
    let root = tempfile::tempdir().unwrap();
    let good = root.path().join("good.toml");
    fs::write(&good, MINIMAL).unwrap();
    let out = riotsim(root.path(), &["run", good.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bad = root.path().join("bad.toml");
    fs::write(&bad, "model = \"site\"\nbogus = 1\n").unwrap();
    let out = riotsim(root.path(), &["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = riotsim(root.path(), &["preset", "fig-nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_prints_presets() {
    let root = tempfile::tempdir().unwrap();
    let out = riotsim(root.path(), &["list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), PRESETS);
}

#[test]
fn emit_then_run_matches_preset() {
    let root = tempfile::tempdir().unwrap();
    let out = riotsim(
        root.path(),
        &[
            "preset",
            "fig-delay",
            "--override",
            "params.theta=0.25",
            "--emit",
        ],
    );
    let cfg = parse_config(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.params.theta, 0.25);
    assert_eq!(cfg.params.beta, 100.0);
}

#[test]
fn analyze_site_and_field_trajectories() {
    let root = tempfile::tempdir().unwrap();
    let site = root.path().join("site");
    run(&preset("fig-nullcline").unwrap().resolve().unwrap(), &site).unwrap();
    let out = riotsim(
        root.path(),
        &[
            "analyze",
            site.join(TRAJECTORY).to_str().unwrap(),
            "--kind",
            "relaxation",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["relaxed"], true);
    assert!(site.join("analysis-relaxation.json").exists());
    let out = riotsim(
        root.path(),
        &[
            "analyze",
            site.join(TRAJECTORY).to_str().unwrap(),
            "--kind",
            "front",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    let field = root.path().join("field");
    let cfg = apply_overrides(
        &preset("pde-bump").unwrap(),
        &[parse_override("numerics.t_end=1.0").unwrap()],
    )
    .unwrap();
    let s = run(&cfg.resolve().unwrap(), &field).unwrap();
    for kind in ["peaks", "mass", "front"] {
        let out = riotsim(
            root.path(),
            &[
                "analyze",
                field.join(TRAJECTORY).to_str().unwrap(),
                "--kind",
                kind,
            ],
        );
        assert!(
            out.status.success(),
            "{kind}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["kind"], kind);
    }
    let v: Value =
        serde_json::from_str(&fs::read_to_string(field.join("analysis-peaks.json")).unwrap())
            .unwrap();
    assert_eq!(
        v["peak_violations"],
        s.get("peak_violations").cloned().unwrap()
    );
}
