use proptest::prelude::*;
use riot_core::continuum::{integrate_pde, FieldState, PdeParams, PdeStepping, SpatialGrid};
use riot_core::kernel::{lambda_star, ModelParams};
use riot_core::network::{grid_graph, integrate_network, NetStepping, NetworkState, SocialSpec};
use riot_core::shocks::{Shock, ShockSchedule, Site};
use riot_core::single_site::{integrate_site, Stepping};
use riot_core::SiteState;

fn params() -> ModelParams {
    ModelParams {
        z0: 2.0,
        omega: 0.4,
        beta: 3.0,
        a: 1.0,
        theta: 0.7,
        p: 0.7,
        ..ModelParams::default()
    }
}

#[test]
fn uniform_field_follows_single_site() {
    let p = params();
    let grid = SpatialGrid::line(0.0, 5.0, 20).unwrap();
    let st = PdeStepping::new(15.0).dt(1e-3).stride(1000);
    let field = integrate_pde(
        &PdeParams::local(p, 0.5),
        &grid,
        &ShockSchedule::none(),
        &FieldState::uniform(grid.len(), 0.01, 4.0),
        &st,
    )
    .unwrap();
    let site = integrate_site(
        &p,
        &ShockSchedule::none(),
        SiteState::new(0.01, 4.0),
        &Stepping::new(15.0, 1e-3).stride(1000),
    )
    .unwrap();
    assert_eq!(field.times.len(), site.times.len());
    for (k, s) in site.states.iter().enumerate() {
        for i in 0..grid.len() {
            assert!(
                (field.lambda[k][i] - s.lambda).abs() < 1e-9,
                "t={}",
                site.times[k]
            );
            assert!((field.alpha[k][i] - s.alpha).abs() < 1e-9);
        }
    }
}

#[test]
fn uniform_network_follows_single_site() {
    let p = ModelParams {
        eta: 0.2,
        ..params()
    };
    let g = grid_graph(4, 4, &SocialSpec::CopyOfV).unwrap();
    let sched = ShockSchedule::explicit(
        (0..16)
            .map(|s| Shock::at(0.0, 4.0, Site::Node(s)))
            .collect(),
    );
    let net = integrate_network(
        &g,
        &p,
        &sched,
        &NetworkState::uniform(g.n, 0.01, 0.0),
        &NetStepping {
            eta_alpha: Some(0.0),
            ..NetStepping::new(20.0, 1e-3).stride(500)
        },
    )
    .unwrap();
    let site = integrate_site(
        &p,
        &ShockSchedule::single(0.0, 4.0),
        SiteState::new(0.01, 0.0),
        &Stepping::new(20.0, 1e-3).stride(500),
    )
    .unwrap();
    for (k, s) in site.states.iter().enumerate() {
        assert!(
            net.lambda[k].iter().all(|l| (l - s.lambda).abs() < 1e-9),
            "t={}",
            site.times[k]
        );
        assert!(net.alpha[k].iter().all(|a| (a - s.alpha).abs() < 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn site_activity_never_exceeds_ceiling(shocks in prop::collection::vec((0.0f64..30.0, 0.0f64..50.0), 0..6), l0 in 0.0f64..1.6) {
        let p = params();
        let sched = ShockSchedule::explicit(shocks.iter().map(|&(t, a)| Shock::new(t, a)).collect());
        let traj = integrate_site(&p, &sched, SiteState::new(l0, 0.0), &Stepping::new(40.0, 1e-2)).unwrap();
        let cap = lambda_star(&p).unwrap();
        prop_assert!(traj.states.iter().all(|s| s.lambda <= cap + 1e-6 && s.lambda >= 0.0 && s.alpha >= 0.0));
    }

    #[test]
    fn network_activity_never_exceeds_ceiling(node in 0usize..9, a in 0.0f64..40.0, t in 0.0f64..5.0) {
        let p = ModelParams { eta: 0.2, ..params() };
        let g = grid_graph(3, 3, &SocialSpec::CopyOfV).unwrap();
        let sched = ShockSchedule::explicit(vec![Shock::at(t, a, Site::Node(node))]);
        let traj = integrate_network(&g, &p, &sched, &NetworkState::uniform(9, 0.01, 0.0), &NetStepping::new(15.0, 1e-2).stride(10)).unwrap();
        let cap = lambda_star(&p).unwrap();
        prop_assert!(traj.lambda.iter().flatten().all(|l| *l <= cap + 1e-6 && *l >= 0.0));
    }
}
