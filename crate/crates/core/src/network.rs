//! Network dynamics with geographic diffusion of activity and social averaging of tension.

use std::collections::VecDeque;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_g, eval_h, eval_r, lambda_star, ModelParams};
use crate::shocks::{apply_node_shock, Shock, ShockSchedule, Site};
use crate::single_site::{clamp, drive, Stepping, CLAMP_WARN_LIMIT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SocialSpec {
    Hub {
        node: usize,
    },
    TwoHubs {
        first: usize,
        second: usize,
    },
    CopyOfV,
    /// Directed pairs `(s, j)` meaning node `s` listens to node `j`.
    Explicit {
        edges: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    /// Geographic neighbors, symmetric.
    pub v: Vec<Vec<usize>>,
    /// Social sources: `c[s]` lists the nodes `s` listens to.
    pub c: Vec<Vec<usize>>,
    pub positions: Option<Vec<(f64, f64)>>,
}

fn sorted_unique(mut xs: Vec<usize>) -> Vec<usize> {
    xs.sort_unstable();
    xs.dedup();
    xs
}

impl Graph {
    /// Builds a graph from undirected geographic edges and directed social edges.
    pub fn from_edges(
        n: usize,
        v_edges: &[(usize, usize)],
        c_edges: &[(usize, usize)],
    ) -> Result<Self> {
        let mut v = vec![Vec::new(); n];
        let mut c = vec![Vec::new(); n];
        for &(i, j) in v_edges {
            if i >= n || j >= n {
                return Err(Error::SiteOutOfRange { site: i.max(j), n });
            }
            if i != j {
                v[i].push(j);
                v[j].push(i);
            }
        }
        for &(s, j) in c_edges {
            if s >= n || j >= n {
                return Err(Error::SiteOutOfRange { site: s.max(j), n });
            }
            if s != j {
                c[s].push(j);
            }
        }
        Ok(Self {
            n,
            v: v.into_iter().map(sorted_unique).collect(),
            c: c.into_iter().map(sorted_unique).collect(),
            positions: None,
        })
    }

    pub fn d_v(&self, s: usize) -> usize {
        self.v[s].len()
    }

    pub fn d_c(&self, s: usize) -> usize {
        self.c[s].len()
    }

    pub fn v_edge_count(&self) -> usize {
        self.v.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Rejects isolated nodes for couplings that are switched on.
    pub fn validate_for(&self, eta_lambda: f64, eta_alpha: f64) -> Result<()> {
        for s in 0..self.n {
            if eta_lambda > 0.0 && self.d_v(s) == 0 {
                return Err(Error::Graph(format!("node {s} has no geographic neighbor")));
            }
            if eta_alpha > 0.0 && self.d_c(s) == 0 {
                return Err(Error::Graph(format!("node {s} has no social source")));
            }
        }
        Ok(())
    }

    /// Breadth-first geographic distance from `from`; unreachable nodes get `usize::MAX`.
    pub fn v_distances(&self, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::from([from]);
        dist[from] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &self.v[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Parses "i j" pairs, one per line; blank lines and `#` comments are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(i)), Some(Ok(j)), None) => out.push((i, j)),
            _ => {
                return Err(Error::Graph(format!(
                    "line {}: expected two node indices",
                    k + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Four-neighbor grid with the requested social topology. Node id is `row * cols + col`.
pub fn grid_graph(rows: usize, cols: usize, social: &SocialSpec) -> Result<Graph> {
    let n = rows * cols;
    if n < 2 {
        return Err(Error::Graph("grid needs at least two nodes".into()));
    }
    let mut v_edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                v_edges.push((i, i + 1));
            }
            if r + 1 < rows {
                v_edges.push((i, i + cols));
            }
        }
    }
    let check = |h: usize| {
        if h < n {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange { site: h, n })
        }
    };
    let c_edges: Vec<(usize, usize)> = match social {
        SocialSpec::Hub { node } => {
            check(*node)?;
            (0..n)
                .filter(|&s| s != *node)
                .flat_map(|s| [(s, *node), (*node, s)])
                .collect()
        }
        SocialSpec::TwoHubs { first, second } => {
            check(*first)?;
            check(*second)?;
            if first == second {
                return Err(Error::Graph("two_hubs needs distinct nodes".into()));
            }
            let mut e = Vec::new();
            for s in 0..n {
                for h in [*first, *second] {
                    if s != h {
                        e.push((s, h));
                        e.push((h, s));
                    }
                }
            }
            e
        }
        SocialSpec::CopyOfV => v_edges.clone(),
        SocialSpec::Explicit { edges } => edges.clone(),
    };
    let mut g = Graph::from_edges(n, &v_edges, &c_edges)?;
    if matches!(social, SocialSpec::CopyOfV) {
        g.c = g.v.clone();
    }
    g.positions = Some(
        (0..n)
            .map(|i| ((i % cols) as f64, (i / cols) as f64))
            .collect(),
    );
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl NetworkState {
    pub fn uniform(n: usize, lambda: f64, alpha: f64) -> Self {
        Self {
            lambda: vec![lambda; n],
            alpha: vec![alpha; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// Coupling strengths for the two channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub eta_lambda: f64,
    pub eta_alpha: f64,
}

impl Coupling {
    pub fn from_params(params: &ModelParams, eta_alpha: Option<f64>) -> Self {
        Self {
            eta_lambda: params.eta,
            eta_alpha: eta_alpha.unwrap_or(params.eta),
        }
    }
}

fn rhs_into(
    lambda: &[f64],
    alpha: &[f64],
    g: &Graph,
    p: &ModelParams,
    k: Coupling,
    dl: &mut [f64],
    da: &mut [f64],
) {
    for s in 0..g.n {
        let (l, a) = (lambda[s], alpha[s]);
        let mut lap = 0.0;
        for &j in &g.v[s] {
            lap += lambda[j] - l;
        }
        let diff = if g.v[s].is_empty() {
            0.0
        } else {
            k.eta_lambda / g.v[s].len() as f64 * lap
        };
        dl[s] = diff - p.omega * (l - p.lambda_b) + eval_r(a, p) * eval_g(l, p);
        let mut inflow = 0.0;
        for &j in &g.c[s] {
            inflow += alpha[j];
        }
        let social = if g.c[s].is_empty() {
            0.0
        } else {
            k.eta_alpha / g.c[s].len() as f64 * inflow
        };
        da[s] = social - eval_h(l, p) * a + p.theta * p.alpha_b;
    }
}

/// Per-node drift of (lambda, alpha), both couplings at strength `eta`.
pub fn network_rhs(state: &NetworkState, graph: &Graph, params: &ModelParams) -> NetworkState {
    let n = graph.n;
    let mut out = NetworkState::uniform(n, 0.0, 0.0);
    rhs_into(
        &state.lambda,
        &state.alpha,
        graph,
        params,
        Coupling::from_params(params, None),
        &mut out.lambda,
        &mut out.alpha,
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Noise {
    #[default]
    None,
    Brownian {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetStepping {
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub noise: Noise,
    /// Separate strength for the tension coupling; defaults to `eta`.
    pub eta_alpha: Option<f64>,
}

impl NetStepping {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self {
            t_end,
            dt,
            stride: 1,
            noise: Noise::None,
            eta_alpha: None,
        }
    }

    pub fn stride(self, stride: usize) -> Self {
        Self {
            stride: stride.max(1),
            ..self
        }
    }

    pub fn noise(self, noise: Noise) -> Self {
        Self { noise, ..self }
    }

    /// Default timing tolerance for spread classification.
    pub fn tolerance(&self) -> f64 {
        2.0 * self.dt * self.stride as f64
    }

    fn as_stepping(&self) -> Stepping {
        Stepping::new(self.t_end, self.dt).stride(self.stride)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetTrajectory {
    pub times: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub shock_marks: Vec<usize>,
    pub params: ModelParams,
    pub clamps: u64,
    /// Smallest raw value seen before clamping.
    pub min_raw: f64,
    pub warnings: Vec<String>,
}

impl NetTrajectory {
    /// Time integral of the summed activity from `from` onward (trapezoid on the samples).
    pub fn total_activity(&self, from: f64) -> f64 {
        let sums: Vec<f64> = self.lambda.iter().map(|l| l.iter().sum()).collect();
        let mut acc = 0.0;
        for i in 1..self.times.len() {
            let (t0, t1) = (self.times[i - 1], self.times[i]);
            if t1 <= from {
                continue;
            }
            let start = t0.max(from);
            let w = (start - t0) / (t1 - t0);
            let s0 = sums[i - 1] + w * (sums[i] - sums[i - 1]);
            acc += 0.5 * (t1 - start) * (s0 + sums[i]);
        }
        acc
    }

    /// Rows `t node lambda alpha` at 17 significant digits.
    pub fn write_columns<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t node lambda alpha")?;
        for (k, t) in self.times.iter().enumerate() {
            for s in 0..self.lambda[k].len() {
                writeln!(
                    w,
                    "{t:.16e} {s} {:.16e} {:.16e}",
                    self.lambda[k][s], self.alpha[k][s]
                )?;
            }
        }
        Ok(())
    }
}

struct Work {
    k: [Vec<f64>; 8],
    tl: Vec<f64>,
    ta: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tl: vec![0.0; n],
            ta: vec![0.0; n],
        }
    }
}

fn rk4_step(
    l: &mut [f64],
    a: &mut [f64],
    h: f64,
    g: &Graph,
    p: &ModelParams,
    cp: Coupling,
    w: &mut Work,
) {
    let n = l.len();
    let [k1l, k1a, k2l, k2a, k3l, k3a, k4l, k4a] = &mut w.k;
    rhs_into(l, a, g, p, cp, k1l, k1a);
    for i in 0..n {
        w.tl[i] = l[i] + 0.5 * h * k1l[i];
        w.ta[i] = a[i] + 0.5 * h * k1a[i];
    }
    rhs_into(&w.tl, &w.ta, g, p, cp, k2l, k2a);
    for i in 0..n {
        w.tl[i] = l[i] + 0.5 * h * k2l[i];
        w.ta[i] = a[i] + 0.5 * h * k2a[i];
    }
    rhs_into(&w.tl, &w.ta, g, p, cp, k3l, k3a);
    for i in 0..n {
        w.tl[i] = l[i] + h * k3l[i];
        w.ta[i] = a[i] + h * k3a[i];
    }
    rhs_into(&w.tl, &w.ta, g, p, cp, k4l, k4a);
    for i in 0..n {
        l[i] += h / 6.0 * (k1l[i] + 2.0 * k2l[i] + 2.0 * k3l[i] + k4l[i]);
        a[i] += h / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
    }
}

#[allow(clippy::too_many_arguments)]
fn em_step(
    l: &mut [f64],
    a: &mut [f64],
    h: f64,
    g: &Graph,
    p: &ModelParams,
    cp: Coupling,
    w: &mut Work,
    rng: &mut ChaCha8Rng,
) {
    let [dl, da, ..] = &mut w.k;
    rhs_into(l, a, g, p, cp, dl, da);
    let sq = h.sqrt();
    for i in 0..l.len() {
        let xi: f64 = StandardNormal.sample(rng);
        let noise = p.sigma * l[i] * sq * xi;
        l[i] += h * dl[i] + noise;
        a[i] += h * da[i];
    }
}

/// RK4 (no noise) or Euler-Maruyama (Brownian noise) with exact stops at node shocks.
pub fn integrate_network(
    graph: &Graph,
    params: &ModelParams,
    schedule: &ShockSchedule,
    initial: &NetworkState,
    stepping: &NetStepping,
) -> Result<NetTrajectory> {
    params.validate()?;
    let st = stepping.as_stepping();
    st.validate()?;
    if initial.len() != graph.n {
        return Err(Error::Graph(format!(
            "initial state has {} nodes, graph has {}",
            initial.len(),
            graph.n
        )));
    }
    let cp = Coupling::from_params(params, stepping.eta_alpha);
    graph.validate_for(cp.eta_lambda, cp.eta_alpha)?;
    let shocks = schedule.realize_seeded(stepping.t_end)?;
    for s in &shocks {
        match s.site {
            Site::Node(i) if i < graph.n => {}
            Site::Node(i) => {
                return Err(Error::SiteOutOfRange {
                    site: i,
                    n: graph.n,
                })
            }
            _ => return Err(Error::MissingSite("node")),
        }
    }
    integrate_network_shocks(graph, params, &shocks, initial, stepping, cp)
}

fn integrate_network_shocks(
    graph: &Graph,
    params: &ModelParams,
    shocks: &[Shock],
    initial: &NetworkState,
    stepping: &NetStepping,
    cp: Coupling,
) -> Result<NetTrajectory> {
    let state = std::cell::RefCell::new(initial.clone());
    let mut work = Work::new(graph.n);
    let mut rng = match stepping.noise {
        Noise::Brownian { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Noise::None => None,
    };
    let mut clamps = 0u64;
    let mut min_raw = f64::INFINITY;
    let mut times = Vec::new();
    let mut lam = Vec::new();
    let mut alp = Vec::new();
    let mut marks = Vec::new();
    drive(
        shocks,
        &stepping.as_stepping(),
        |t, h| {
            let mut s = state.borrow_mut();
            let NetworkState { lambda, alpha } = &mut *s;
            match rng.as_mut() {
                Some(r) => em_step(lambda, alpha, h, graph, params, cp, &mut work, r),
                None => rk4_step(lambda, alpha, h, graph, params, cp, &mut work),
            }
            for x in lambda.iter_mut().chain(alpha.iter_mut()) {
                if !x.is_finite() {
                    return Err(Error::BlowUp { time: t + h });
                }
                min_raw = min_raw.min(*x);
                clamp(x, &mut clamps);
            }
            Ok(())
        },
        |shock| apply_node_shock(&mut state.borrow_mut().alpha, shock),
        |t, shocked| {
            if shocked {
                marks.push(times.len());
            }
            let s = state.borrow();
            times.push(t);
            lam.push(s.lambda.clone());
            alp.push(s.alpha.clone());
        },
    )?;
    let mut warnings = Vec::new();
    if let Ok(ls) = lambda_star(params) {
        let floor = eval_h(ls, params);
        if cp.eta_alpha > 0.0 && floor <= cp.eta_alpha {
            warnings.push(format!(
                "tension decay h(lambda*) = {floor:.4} does not exceed the social coupling {}; tension may grow on long horizons",
                cp.eta_alpha
            ));
        }
    }
    if clamps > CLAMP_WARN_LIMIT {
        warnings.push(format!(
            "{clamps} negativity clamps exceeded the quality limit"
        ));
    }
    Ok(NetTrajectory {
        times,
        lambda: lam,
        alpha: alp,
        shock_marks: marks,
        params: *params,
        clamps,
        min_raw: if min_raw.is_finite() { min_raw } else { 0.0 },
        warnings,
    })
}

/// First sample time with lambda >= fraction * lambda*, infinity if never.
pub fn activation_times(traj: &NetTrajectory, threshold_fraction: f64) -> Result<Vec<f64>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidParam {
            name: "threshold_fraction",
            reason: format!("must lie in (0,1), got {threshold_fraction}"),
        });
    }
    let level = threshold_fraction * lambda_star(&traj.params)?;
    let n = traj.lambda.first().map_or(0, Vec::len);
    let mut out = vec![f64::INFINITY; n];
    for (k, row) in traj.lambda.iter().enumerate() {
        for (s, &l) in row.iter().enumerate() {
            if out[s].is_infinite() && l >= level {
                out[s] = traj.times[k];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spread {
    Contained,
    Local,
    Nonlocal,
}

/// Spread class from activation times and geographic distances to the seed.
pub fn classify_activation(times: &[f64], graph: &Graph, seed_node: usize, tol: f64) -> Spread {
    let dist = graph.v_distances(seed_node);
    let active: Vec<usize> = (0..graph.n).filter(|&s| times[s].is_finite()).collect();
    if active.iter().all(|&s| dist[s] <= 1) {
        return Spread::Contained;
    }
    for &s in &active {
        if s == seed_node {
            continue;
        }
        let fed = graph.v[s].iter().any(|&j| times[j] < times[s]);
        if !fed {
            return Spread::Nonlocal;
        }
    }
    for &i in &active {
        for &j in &active {
            if dist[i] < dist[j] && times[j] + tol <= times[i] {
                return Spread::Nonlocal;
            }
        }
    }
    Spread::Local
}

pub fn classify_spread(
    traj: &NetTrajectory,
    graph: &Graph,
    seed_node: usize,
    threshold_fraction: f64,
    tol: f64,
) -> Result<Spread> {
    if seed_node >= graph.n {
        return Err(Error::SiteOutOfRange {
            site: seed_node,
            n: graph.n,
        });
    }
    let times = activation_times(traj, threshold_fraction)?;
    Ok(classify_activation(&times, graph, seed_node, tol))
}

/// Everything needed to rerun a single-seed spread experiment at different amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadSetup {
    pub graph: Graph,
    pub params: ModelParams,
    pub initial: NetworkState,
    pub stepping: NetStepping,
    pub seed_node: usize,
    pub threshold_fraction: f64,
    pub tol: Option<f64>,
}

impl SpreadSetup {
    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or_else(|| self.stepping.tolerance())
    }

    pub fn run(&self, amplitude: f64) -> Result<NetTrajectory> {
        let schedule =
            ShockSchedule::explicit(vec![Shock::at(0.0, amplitude, Site::Node(self.seed_node))]);
        integrate_network(
            &self.graph,
            &self.params,
            &schedule,
            &self.initial,
            &self.stepping,
        )
    }

    pub fn classify(&self, amplitude: f64) -> Result<Spread> {
        let traj = self.run(amplitude)?;
        classify_spread(
            &traj,
            &self.graph,
            self.seed_node,
            self.threshold_fraction,
            self.tolerance(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub classes: Vec<(f64, Spread)>,
    /// Bracket around the contained to spreading transition.
    pub a1: Option<(f64, f64)>,
    /// Bracket around the local to nonlocal transition.
    pub a_star: Option<(f64, f64)>,
    pub monotone: bool,
    pub flags: Vec<String>,
}

fn refine_bracket<F: Fn(f64) -> Result<bool>>(
    above: F,
    mut lo: f64,
    mut hi: f64,
    rounds: usize,
) -> Result<(f64, f64)> {
    for _ in 0..rounds {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Classifies each amplitude and brackets the two transitions, refined by three bisection rounds.
pub fn double_threshold_scan(setup: &SpreadSetup, a_grid: &[f64]) -> Result<ThresholdScan> {
    if a_grid.is_empty() || a_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Insufficient(
            "amplitude grid must be nonempty and increasing".into(),
        ));
    }
    let classes: Vec<(f64, Spread)> = a_grid
        .iter()
        .map(|&a| setup.classify(a).map(|c| (a, c)))
        .collect::<Result<_>>()?;
    let monotone = classes.windows(2).all(|w| w[0].1 <= w[1].1);
    let mut flags = Vec::new();
    if !monotone {
        flags.push("classification is not monotone in amplitude".to_string());
    }
    let bracket = |pred: &dyn Fn(Spread) -> bool| -> Option<(f64, f64)> {
        let k = classes.iter().position(|(_, c)| pred(*c))?;
        (k > 0).then(|| (classes[k - 1].0, classes[k].0))
    };
    let a1 = match bracket(&|c| c > Spread::Contained) {
        Some((lo, hi)) => Some(refine_bracket(
            |a| setup.classify(a).map(|c| c > Spread::Contained),
            lo,
            hi,
            3,
        )?),
        None => None,
    };
    let a_star = match bracket(&|c| c == Spread::Nonlocal) {
        Some((lo, hi)) => Some(refine_bracket(
            |a| setup.classify(a).map(|c| c == Spread::Nonlocal),
            lo,
            hi,
            3,
        )?),
        None => None,
    };
    if classes.iter().all(|(_, c)| *c == Spread::Contained) {
        flags.push("no spreading observed".to_string());
    }
    let distinct = {
        let mut v: Vec<Spread> = classes.iter().map(|(_, c)| *c).collect();
        v.sort();
        v.dedup();
        v.len()
    };
    if distinct < 3 {
        flags.push(format!("partial result: {distinct} of 3 regimes observed"));
    }
    Ok(ThresholdScan {
        classes,
        a1,
        a_star,
        monotone,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub activated: usize,
    pub total_activity: f64,
    pub activity_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub single: Scenario,
    pub double: Scenario,
    /// Ratio of post-second-shock activity, double over single.
    pub ratio_after: f64,
    pub dominates: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySpec {
    pub first_node: usize,
    pub first_amplitude: f64,
    pub second_node: usize,
    pub second_amplitude: f64,
    pub second_time: f64,
}

/// One-shock versus two-shock runs on the same network.
pub fn delay_experiment(
    graph: &Graph,
    params: &ModelParams,
    initial: &NetworkState,
    stepping: &NetStepping,
    spec: &DelaySpec,
    threshold_fraction: f64,
) -> Result<DelayReport> {
    let first = Shock::at(0.0, spec.first_amplitude, Site::Node(spec.first_node));
    let run = |shocks: Vec<Shock>| -> Result<Scenario> {
        let traj = integrate_network(
            graph,
            params,
            &ShockSchedule::explicit(shocks),
            initial,
            stepping,
        )?;
        let act = activation_times(&traj, threshold_fraction)?;
        Ok(Scenario {
            activated: act.iter().filter(|t| t.is_finite()).count(),
            total_activity: traj.total_activity(0.0),
            activity_after: traj.total_activity(spec.second_time),
        })
    };
    let single = run(vec![first.clone()])?;
    let double = if spec.second_amplitude > 0.0 {
        run(vec![
            first,
            Shock::at(
                spec.second_time,
                spec.second_amplitude,
                Site::Node(spec.second_node),
            ),
        ])?
    } else {
        single
    };
    let ratio_after = double.activity_after / single.activity_after;
    Ok(DelayReport {
        single,
        double,
        ratio_after,
        dominates: double.activity_after > single.activity_after,
    })
}
