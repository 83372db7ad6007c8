//! Named configurations for the figure scenarios.

use riot_core::network::SocialSpec;
use riot_core::shocks::{Shock, ShockSchedule, Site};
use riot_core::ModelParams;

use crate::config::{
    ContinuumSpec, Experiment, GraphSpec, Initial, ModelKind, NetworkSpec, Numerics, RunConfig,
};
use crate::error::{CliError, CliResult};

pub const PRESETS: [&str; 12] = [
    "fig-slow",
    "fig-fast",
    "fig-delay",
    "fig-double",
    "fig-nullcline",
    "fig-periodic",
    "net-double-threshold",
    "net-delay",
    "pde-wavefront",
    "pde-bump",
    "pde-bistable",
    "pde-monostable",
];

/// Hub of the single-hub social network and default seed node.
pub const HUB: usize = 44;
pub const HUB_P: usize = 22;
pub const HUB_M: usize = 77;

fn numerics(t_end: f64, stride: usize) -> Numerics {
    Numerics {
        t_end,
        stride,
        ..Numerics::default()
    }
}

fn site(
    name: &str,
    params: ModelParams,
    schedule: ShockSchedule,
    lambda0: f64,
    t_end: f64,
) -> RunConfig {
    RunConfig {
        params,
        schedule,
        initial: Initial::Uniform {
            lambda: lambda0,
            alpha: 0.0,
        },
        numerics: numerics(t_end, 100),
        ..RunConfig::new(name, ModelKind::Site)
    }
}

fn burst(z0: f64, omega: f64, theta: f64, beta: f64) -> ModelParams {
    ModelParams {
        z0,
        omega,
        theta,
        p: 1.0,
        beta,
        a: 6.0,
        ..ModelParams::default()
    }
}

pub fn network_params() -> ModelParams {
    ModelParams {
        omega: 0.2,
        theta: 0.3,
        z0: 10.0,
        beta: 1.0,
        a: 100.0,
        p: 0.7,
        eta: 0.2,
        ..ModelParams::default()
    }
}

pub fn continuum_params() -> ModelParams {
    ModelParams {
        z0: 10.0,
        a: 100.0,
        omega: 0.2,
        theta: 0.05,
        eta: 0.198,
        beta: 1.0,
        p: 0.7,
        ..ModelParams::default()
    }
}

pub fn regime_params(a: f64) -> ModelParams {
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

fn network(
    name: &str,
    params: ModelParams,
    social: SocialSpec,
    schedule: ShockSchedule,
    experiment: Experiment,
    t_end: f64,
) -> RunConfig {
    RunConfig {
        params,
        schedule,
        initial: Initial::Uniform {
            lambda: 0.01,
            alpha: 0.0,
        },
        numerics: numerics(t_end, 100),
        network: Some(NetworkSpec {
            graph: GraphSpec::Grid {
                rows: 10,
                cols: 10,
                social,
            },
            eta_alpha: None,
        }),
        experiment,
        ..RunConfig::new(name, ModelKind::Network)
    }
}

fn field(
    name: &str,
    params: ModelParams,
    continuum: ContinuumSpec,
    initial: Initial,
    schedule: ShockSchedule,
    t_end: f64,
    stride: usize,
) -> RunConfig {
    RunConfig {
        params,
        schedule,
        initial,
        numerics: numerics(t_end, stride),
        continuum: Some(continuum),
        ..RunConfig::new(name, ModelKind::PdeLocal)
    }
}

fn point(time: f64, amplitude: f64, x: f64) -> ShockSchedule {
    ShockSchedule::explicit(vec![Shock::at(time, amplitude, Site::Point(vec![x]))])
}

pub fn preset(name: &str) -> CliResult<RunConfig> {
    let name = if name == "network-double-threshold" {
        "net-double-threshold"
    } else {
        name
    };
    let cfg = match name {
        "fig-slow" => site(
            name,
            burst(10.0, 0.2, 0.1, 10.0),
            ShockSchedule::explicit(vec![Shock::new(0.0, 5.0), Shock::new(12.0, 5.0)]),
            0.01,
            150.0,
        ),
        "fig-fast" => site(
            name,
            burst(10.0, 0.2, 0.1, 1.0),
            ShockSchedule::single(0.0, 6.0),
            0.01,
            100.0,
        ),
        "fig-delay" => site(
            name,
            burst(10.0, 0.3, 0.3, 100.0),
            ShockSchedule::single(0.0, 8.0),
            1e-3,
            40.0,
        ),
        "fig-double" => site(
            name,
            burst(10.0, 0.3, 0.4, 1.0),
            ShockSchedule::explicit(vec![Shock::new(0.0, 6.0), Shock::new(20.0, 3.0)]),
            0.2,
            60.0,
        ),
        "fig-nullcline" => RunConfig {
            experiment: Experiment::Relaxation { eps: 1e-3 },
            ..site(
                name,
                ModelParams::default(),
                ShockSchedule::single(0.0, 4.0),
                0.01,
                60.0,
            )
        },
        "fig-periodic" => RunConfig {
            experiment: Experiment::Forced {
                delta_fraction: 0.2,
            },
            ..site(
                name,
                ModelParams::default(),
                ShockSchedule::periodic(2.0, 2.0),
                0.01,
                500.0,
            )
        },
        "net-double-threshold" => network(
            name,
            network_params(),
            SocialSpec::Hub { node: HUB },
            ShockSchedule::explicit(vec![Shock::at(0.0, 6.0, Site::Node(HUB))]),
            Experiment::DoubleThreshold {
                seed_node: HUB,
                amplitudes: (2..=10).map(f64::from).collect(),
                threshold_fraction: 0.2,
            },
            50.0,
        ),
        "net-delay" => network(
            name,
            ModelParams {
                a: 4.94,
                ..network_params()
            },
            SocialSpec::TwoHubs {
                first: HUB_P,
                second: HUB_M,
            },
            ShockSchedule::explicit(vec![
                Shock::at(0.0, 5.0, Site::Node(HUB_P)),
                Shock::at(30.0, 2.0, Site::Node(HUB_M)),
            ]),
            Experiment::Delay {
                first_node: HUB_P,
                first_amplitude: 5.0,
                second_node: HUB_M,
                second_amplitude: 2.0,
                second_time: 30.0,
                threshold_fraction: 0.2,
            },
            100.0,
        ),
        "pde-wavefront" => RunConfig {
            experiment: Experiment::Peaks { source: vec![0.0] },
            ..field(
                name,
                continuum_params(),
                ContinuumSpec {
                    d: 0.1,
                    ..ContinuumSpec::default()
                },
                Initial::Exponential {
                    amplitude: 1.0,
                    rate: 10.0,
                },
                point(0.0, 50.0, 0.0),
                4.0,
                10,
            )
        },
        "pde-bump" => RunConfig {
            experiment: Experiment::Peaks { source: vec![5.0] },
            ..field(
                name,
                continuum_params(),
                ContinuumSpec {
                    d: 0.1,
                    ..ContinuumSpec::default()
                },
                Initial::Uniform {
                    lambda: 2.0,
                    alpha: 0.0,
                },
                point(0.0, 100.0, 5.0),
                2.5,
                10,
            )
        },
        "pde-bistable" | "pde-monostable" => {
            let a = if name == "pde-bistable" { 5.0 } else { 1.0 };
            RunConfig {
                experiment: Experiment::Front {
                    thresholds: vec![0.3, 0.5],
                },
                ..field(
                    name,
                    regime_params(a),
                    ContinuumSpec {
                        hi: 100.0,
                        ..ContinuumSpec::default()
                    },
                    Initial::Front { until: 10.0 },
                    ShockSchedule::none(),
                    300.0,
                    400,
                )
            }
        }
        other => return Err(CliError::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{emit_config, parse_config};

    #[test]
    fn all_presets_validate_and_round_trip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let text = emit_config(&cfg).unwrap();
            assert_eq!(parse_config(&text).unwrap(), cfg, "{name}");
            let resolved = cfg.resolve().unwrap();
            assert_eq!(
                parse_config(&emit_config(&resolved).unwrap()).unwrap(),
                resolved,
                "{name}"
            );
        }
    }

    #[test]
    fn slow_preset_expands_caption() {
        let p = preset("fig-slow").unwrap().params;
        assert_eq!(
            (p.z0, p.omega, p.theta, p.p, p.beta, p.a),
            (10.0, 0.2, 0.1, 1.0, 10.0, 6.0)
        );
        match preset("fig-slow").unwrap().schedule {
            ShockSchedule::Explicit { shocks } => assert_eq!(shocks[0].amplitude, 5.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_alias() {
        assert!(matches!(
            preset("fig-nope"),
            Err(CliError::UnknownPreset(_))
        ));
        assert_eq!(
            preset("network-double-threshold").unwrap().name,
            "net-double-threshold"
        );
    }
}
