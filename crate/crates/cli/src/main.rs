use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riot_cli::analyze::{analyze, AnalysisKind};
use riot_cli::config::{
    apply_overrides, emit_config, parse_config, parse_override, RunConfig, MAX_SEED,
};
use riot_cli::presets::{preset, PRESETS};
use riot_cli::runner::{run, run_dir, Status, DEFAULT_OUTPUT_ROOT, OUTPUT_ENV};
use riot_cli::sweep::{parse_values, sweep, write_table};
use riot_cli::CliResult;

#[derive(Parser)]
#[command(
    name = "riotsim",
    version,
    about = "Simulate riot activity and social tension on sites, networks and continua"
)]
struct Cli {
    /// Output root directory.
    #[arg(long, global = true, env = OUTPUT_ENV, default_value = DEFAULT_OUTPUT_ROOT)]
    out: PathBuf,
    /// Overrides the seed of the run and of any stochastic schedule.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML configuration file.
    Run { config: PathBuf },
    /// Run a named preset.
    Preset {
        name: String,
        /// Dotted key=value, e.g. params.theta=0.2 or schedule.shocks.0.amplitude=6.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Print the configuration instead of running it.
        #[arg(long)]
        emit: bool,
    },
    /// Sweep one configuration key over a list of values.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
    /// Analyze a trajectory written by run.
    Analyze {
        trajectory: PathBuf,
        #[arg(long, value_enum)]
        kind: AnalysisKind,
    },
    /// List preset names.
    List,
}

fn load(path: &PathBuf) -> CliResult<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn seeded(cfg: RunConfig, seed: Option<u64>) -> RunConfig {
    match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    }
}

fn execute(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = seeded(load(&config)?, cli.seed).resolve()?;
            let s = run(&cfg, &run_dir(&cfg, &cli.out))?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(s.status == Status::Ok)
        }
        Command::Preset {
            name,
            overrides,
            emit,
        } => {
            let ov = overrides
                .iter()
                .map(|o| parse_override(o))
                .collect::<CliResult<Vec<_>>>()?;
            let cfg = seeded(apply_overrides(&preset(&name)?, &ov)?, cli.seed);
            if emit {
                print!("{}", emit_config(&cfg)?);
                return Ok(true);
            }
            let cfg = cfg.resolve()?;
            let s = run(&cfg, &run_dir(&cfg, &cli.out))?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(s.status == Status::Ok)
        }
        Command::Sweep {
            config,
            axis,
            values,
        } => {
            let cfg = seeded(load(&config)?, cli.seed);
            let dir = cli.out.join(format!("{}-sweep-{axis}", cfg.name));
            let report = sweep(&cfg, &axis, &parse_values(&values)?, &dir)?;
            write_table(&report, &mut std::io::stdout())?;
            Ok(report.rows.iter().all(|r| r.status == "ok"))
        }
        Command::Analyze { trajectory, kind } => {
            let v = analyze(&trajectory, kind)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(true)
        }
        Command::List => {
            PRESETS.iter().for_each(|p| println!("{p}"));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
