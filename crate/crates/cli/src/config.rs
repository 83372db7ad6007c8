//! Run configuration: TOML in, fully resolved TOML out.

use riot_core::continuum::{Deposit, Nonlocal, SpatialGrid};
use riot_core::network::SocialSpec;
use riot_core::shocks::ShockSchedule;
use riot_core::single_site::Method;
use riot_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_DT: f64 = 1e-3;
/// Seeds are stored as TOML integers.
pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Site,
    Network,
    PdeLocal,
    PdeNonlocal,
}

impl ModelKind {
    pub fn is_pde(self) -> bool {
        matches!(self, ModelKind::PdeLocal | ModelKind::PdeNonlocal)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Site => "site",
            ModelKind::Network => "network",
            ModelKind::PdeLocal => "pde_local",
            ModelKind::PdeNonlocal => "pde_nonlocal",
        }
    }
}

/// Initial data. Pde profiles are functions of the first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    Uniform {
        lambda: f64,
        #[serde(default)]
        alpha: f64,
    },
    /// lambda = amplitude * exp(-rate x), alpha = 0.
    Exponential { amplitude: f64, rate: f64 },
    /// Excited constant state for x < until, non-excited state elsewhere.
    Front { until: f64 },
    /// Per-node values for networks.
    Nodes { lambda: Vec<f64>, alpha: Vec<f64> },
}

impl Default for Initial {
    fn default() -> Self {
        Initial::Uniform {
            lambda: 0.01,
            alpha: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Defaults to 1e-3, or the stability bound for field runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: Method,
    /// Lifts lambda to a tiny positive value before integrating.
    #[serde(default)]
    pub perturb: bool,
}

fn default_t_end() -> f64 {
    50.0
}

fn default_stride() -> usize {
    100
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            dt: None,
            t_end: default_t_end(),
            stride: default_stride(),
            seed: 0,
            method: Method::Rk4,
            perturb: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Grid {
        rows: usize,
        cols: usize,
        social: SocialSpec,
    },
    Edges {
        n: usize,
        v_edges: Vec<(usize, usize)>,
        c_edges: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub graph: GraphSpec,
    /// Social coupling strength when it differs from the geographic one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_alpha: Option<f64>,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec {
            graph: GraphSpec::Grid {
                rows: 10,
                cols: 10,
                social: SocialSpec::CopyOfV,
            },
            eta_alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_d")]
    pub d: f64,
    #[serde(default)]
    pub deposit: Deposit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlocal: Option<Nonlocal>,
}

fn default_dim() -> usize {
    1
}

fn default_hi() -> f64 {
    20.0
}

fn default_cells() -> usize {
    400
}

fn default_d() -> f64 {
    1.0
}

impl Default for ContinuumSpec {
    fn default() -> Self {
        ContinuumSpec {
            dim: 1,
            lo: 0.0,
            hi: default_hi(),
            cells: default_cells(),
            d: default_d(),
            deposit: Deposit::Cell,
            nonlocal: None,
        }
    }
}

impl ContinuumSpec {
    pub fn grid(&self) -> CliResult<SpatialGrid> {
        let g = match self.dim {
            1 => SpatialGrid::line(self.lo, self.hi, self.cells)?,
            2 => SpatialGrid::square([self.lo, self.lo], self.hi - self.lo, self.cells)?,
            d => {
                return Err(CliError::Invalid(format!(
                    "continuum.dim must be 1 or 2, got {d}"
                )))
            }
        };
        Ok(g)
    }
}

fn default_eps() -> f64 {
    1e-3
}

fn default_window_fraction() -> f64 {
    0.05
}

fn default_forced_fraction() -> f64 {
    0.2
}

fn default_activation() -> f64 {
    0.2
}

fn default_front_thresholds() -> Vec<f64> {
    vec![0.3, 0.5]
}

/// Analysis run after (or instead of) the plain integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    #[default]
    None,
    Relaxation {
        #[serde(default = "default_eps")]
        eps: f64,
    },
    /// Window where lambda stays above lambda* - fraction * lambda*.
    Window {
        #[serde(default = "default_window_fraction")]
        delta_fraction: f64,
    },
    Forced {
        #[serde(default = "default_forced_fraction")]
        delta_fraction: f64,
    },
    Hysteresis {
        lo: f64,
        hi: f64,
        points: usize,
    },
    /// Spread class of the first scheduled shock.
    Spread {
        seed_node: usize,
        #[serde(default = "default_activation")]
        threshold_fraction: f64,
    },
    DoubleThreshold {
        seed_node: usize,
        amplitudes: Vec<f64>,
        #[serde(default = "default_activation")]
        threshold_fraction: f64,
    },
    Delay {
        first_node: usize,
        first_amplitude: f64,
        second_node: usize,
        second_amplitude: f64,
        second_time: f64,
        #[serde(default = "default_activation")]
        threshold_fraction: f64,
    },
    Mass,
    Steady,
    /// Thresholds are fractions of lambda*.
    Front {
        #[serde(default = "default_front_thresholds")]
        thresholds: Vec<f64>,
    },
    Peaks {
        source: Vec<f64>,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::None => "none",
            Experiment::Relaxation { .. } => "relaxation",
            Experiment::Window { .. } => "window",
            Experiment::Forced { .. } => "forced",
            Experiment::Hysteresis { .. } => "hysteresis",
            Experiment::Spread { .. } => "spread",
            Experiment::DoubleThreshold { .. } => "double_threshold",
            Experiment::Delay { .. } => "delay",
            Experiment::Mass => "mass",
            Experiment::Steady => "steady",
            Experiment::Front { .. } => "front",
            Experiment::Peaks { .. } => "peaks",
        }
    }

    fn allowed(&self, model: ModelKind) -> bool {
        match self {
            Experiment::None | Experiment::Steady => true,
            Experiment::Relaxation { .. }
            | Experiment::Window { .. }
            | Experiment::Forced { .. }
            | Experiment::Hysteresis { .. } => model == ModelKind::Site,
            Experiment::Spread { .. }
            | Experiment::DoubleThreshold { .. }
            | Experiment::Delay { .. } => model == ModelKind::Network,
            Experiment::Mass | Experiment::Front { .. } | Experiment::Peaks { .. } => {
                model.is_pde()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelKind,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default)]
    pub schedule: ShockSchedule,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuum: Option<ContinuumSpec>,
    #[serde(default)]
    pub experiment: Experiment,
    /// Output directory, relative to the output root unless absolute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_name() -> String {
    "run".to_string()
}

impl RunConfig {
    pub fn new(name: &str, model: ModelKind) -> Self {
        RunConfig {
            name: name.to_string(),
            model,
            params: ModelParams::default(),
            schedule: ShockSchedule::none(),
            initial: Initial::default(),
            numerics: Numerics::default(),
            network: None,
            continuum: None,
            experiment: Experiment::None,
            output: None,
        }
    }

    /// Expands every optional section the model needs and checks invariants.
    pub fn resolve(mut self) -> CliResult<Self> {
        match self.model {
            ModelKind::Network => {
                self.network.get_or_insert_with(NetworkSpec::default);
            }
            m if m.is_pde() => {
                self.continuum.get_or_insert_with(ContinuumSpec::default);
            }
            _ => {}
        }
        if self.output.is_none() {
            self.output = Some(self.name.clone());
        }
        if self.numerics.dt.is_none() {
            let dt = match &self.continuum {
                Some(c) if self.model.is_pde() => c.grid()?.cfl_bound(c.d),
                _ => DEFAULT_DT,
            };
            self.numerics.dt = Some(dt);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.params.validate()?;
        self.schedule.validate()?;
        if !(self.numerics.t_end > 0.0 && self.numerics.t_end.is_finite()) {
            return Err(CliError::Invalid(format!(
                "numerics.t_end must be positive, got {}",
                self.numerics.t_end
            )));
        }
        for seed in [self.numerics.seed, self.schedule.seed()] {
            if seed > MAX_SEED {
                return Err(CliError::Invalid(format!(
                    "seed {seed} exceeds the largest storable seed {MAX_SEED}"
                )));
            }
        }
        if self.numerics.stride == 0 {
            return Err(CliError::Invalid(
                "numerics.stride must be at least 1".into(),
            ));
        }
        if let Some(dt) = self.numerics.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Invalid(format!(
                    "numerics.dt must be positive, got {dt}"
                )));
            }
        }
        if !self.experiment.allowed(self.model) {
            return Err(CliError::Invalid(format!(
                "experiment '{}' is not available for model '{}'",
                self.experiment.name(),
                self.model.name()
            )));
        }
        match self.model {
            ModelKind::Network if self.network.is_none() => {
                return Err(CliError::Invalid("network section missing".into()))
            }
            ModelKind::PdeNonlocal
                if self
                    .continuum
                    .as_ref()
                    .is_some_and(|c| c.nonlocal.is_none()) =>
            {
                return Err(CliError::Invalid(
                    "pde_nonlocal needs continuum.nonlocal".into(),
                ))
            }
            _ => {}
        }
        if let (true, Some(c)) = (self.model.is_pde(), &self.continuum) {
            let grid = c.grid()?;
            if let Some(dt) = self.numerics.dt {
                let bound = grid.cfl_bound(c.d);
                if dt > bound {
                    return Err(riot_core::Error::Cfl { dt, bound }.into());
                }
            }
        }
        Ok(())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a run configuration. Defaults are not expanded.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn emit_config(cfg: &RunConfig) -> CliResult<String> {
    Ok(toml::to_string(cfg)?)
}

/// Value parsed as a TOML scalar or array, falling back to a bare string.
pub fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Sets a dotted path such as `params.theta` or `schedule.shocks.0.amplitude`.
/// A trailing `frequency` on a table holding `period` sets `period = 1 / value`.
pub fn set_path(root: &mut toml::Value, path: &str, value: toml::Value) -> CliResult<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Override(format!("malformed key '{path}'")));
    }
    let (last, parents) = keys.split_last().unwrap();
    let mut node = root;
    for k in parents {
        node = match node {
            toml::Value::Table(t) => t
                .entry(k.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let i: usize = k.parse().map_err(|_| {
                    CliError::Override(format!("'{k}' is not an index in '{path}'"))
                })?;
                let len = a.len();
                a.get_mut(i).ok_or_else(|| {
                    CliError::Override(format!("index {i} out of range ({len}) in '{path}'"))
                })?
            }
            _ => {
                return Err(CliError::Override(format!(
                    "'{path}' descends into a scalar"
                )))
            }
        };
    }
    match node {
        toml::Value::Table(t) => {
            if *last == "frequency" && t.contains_key("period") {
                let nu = value
                    .as_float()
                    .or_else(|| value.as_integer().map(|i| i as f64));
                let nu = nu.filter(|v| *v > 0.0).ok_or_else(|| {
                    CliError::Override("frequency must be a positive number".into())
                })?;
                t.insert("period".into(), toml::Value::Float(1.0 / nu));
            } else {
                t.insert(last.to_string(), value);
            }
        }
        toml::Value::Array(a) => {
            let i: usize = last
                .parse()
                .map_err(|_| CliError::Override(format!("'{last}' is not an index in '{path}'")))?;
            let len = a.len();
            *a.get_mut(i).ok_or_else(|| {
                CliError::Override(format!("index {i} out of range ({len}) in '{path}'"))
            })? = value;
        }
        _ => {
            return Err(CliError::Override(format!(
                "'{path}' descends into a scalar"
            )))
        }
    }
    Ok(())
}

/// Applies `key=value` overrides and re-validates.
pub fn apply_overrides(
    cfg: &RunConfig,
    overrides: &[(String, toml::Value)],
) -> CliResult<RunConfig> {
    if overrides.is_empty() {
        return Ok(cfg.clone());
    }
    let mut tree = toml::Value::try_from(cfg)?;
    for (k, v) in overrides {
        set_path(&mut tree, k, v.clone())?;
    }
    let text = toml::to_string(&tree)?;
    parse_config(&text)
}

/// Splits `key=value`.
pub fn parse_override(raw: &str) -> CliResult<(String, toml::Value)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Override(format!("expected key=value, got '{raw}'")))?;
    Ok((k.trim().to_string(), parse_value(v.trim())))
}

impl RunConfig {
    /// Reseeds the run and any stochastic schedule.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.numerics.seed = seed;
        self.schedule = self.schedule.with_seed(seed);
        self
    }
}
