use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("no excited state: omega >= G'(0)")]
    NoExcitedState,
    #[error("always excitable: omega/G'(0) <= 0")]
    AlwaysExcitable,
    #[error("never excitable: omega/G'(0) >= 1")]
    NeverExcitable,
    #[error("root finder did not converge on [{lo}, {hi}]")]
    RootNotConverged { lo: f64, hi: f64 },
    #[error("non-finite state at t = {time}")]
    BlowUp { time: f64 },
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("site {site} out of range for {n} nodes")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("shock location {0:?} lies outside the grid")]
    LocationOutOfGrid(Vec<f64>),
    #[error("shock requires a {0} site")]
    MissingSite(&'static str),
    #[error("time step {dt} violates the CFL bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("positivity hypothesis h(lambda) - eta > 0 fails at lambda = {lambda}")]
    Positivity { lambda: f64 },
    #[error("kernel row {0} has no mass")]
    EmptyKernelRow(usize),
    #[error("graph: {0}")]
    Graph(String),
    #[error("{0}")]
    Insufficient(String),
}

pub type Result<T> = std::result::Result<T, Error>;
