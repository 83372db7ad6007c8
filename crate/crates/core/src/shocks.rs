//! Exogenous shock schedules: explicit lists, periodic trains, compound Poisson.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SiteState;

/// Where a shock lands: nowhere in particular (single site), a node, or a point in space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    #[default]
    Local,
    Node(usize),
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shock {
    pub time: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub site: Site,
}

impl Shock {
    pub fn new(time: f64, amplitude: f64) -> Self {
        Self {
            time,
            amplitude,
            site: Site::Local,
        }
    }

    pub fn at(time: f64, amplitude: f64, site: Site) -> Self {
        Self {
            time,
            amplitude,
            site,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.time.is_finite() || self.time < 0.0 {
            return Err(Error::InvalidParam {
                name: "shock.time",
                reason: format!("must be finite and >= 0, got {}", self.time),
            });
        }
        if !self.amplitude.is_finite() || self.amplitude <= 0.0 {
            return Err(Error::InvalidParam {
                name: "shock.amplitude",
                reason: format!("must be finite and > 0, got {}", self.amplitude),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum AmplitudeLaw {
    Constant { value: f64 },
    Exponential { mean: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl AmplitudeLaw {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            AmplitudeLaw::Constant { value } => value,
            AmplitudeLaw::Exponential { mean } => {
                Exp::new(1.0 / mean).expect("validated mean").sample(rng)
            }
            AmplitudeLaw::Uniform { lo, hi } => rng.gen_range(lo..=hi),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidParam {
                name: "amplitude_law",
                reason,
            })
        };
        match *self {
            AmplitudeLaw::Constant { value } if !(value.is_finite() && value > 0.0) => {
                bad(format!("constant {value} must be > 0"))
            }
            AmplitudeLaw::Exponential { mean } if !(mean.is_finite() && mean > 0.0) => {
                bad(format!("mean {mean} must be > 0"))
            }
            AmplitudeLaw::Uniform { lo, hi }
                if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) =>
            {
                bad(format!(
                    "uniform bounds [{lo}, {hi}] must satisfy 0 < lo <= hi"
                ))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShockSchedule {
    Explicit {
        shocks: Vec<Shock>,
    },
    Periodic {
        amplitude: f64,
        period: f64,
        #[serde(default)]
        site: Site,
    },
    Poisson {
        rate: f64,
        amplitude: AmplitudeLaw,
        #[serde(default)]
        site: Site,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for ShockSchedule {
    fn default() -> Self {
        ShockSchedule::Explicit { shocks: Vec::new() }
    }
}

impl ShockSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn explicit(mut shocks: Vec<Shock>) -> Self {
        shocks.sort_by(|a, b| a.time.total_cmp(&b.time));
        ShockSchedule::Explicit { shocks }
    }

    pub fn single(time: f64, amplitude: f64) -> Self {
        Self::explicit(vec![Shock::new(time, amplitude)])
    }

    pub fn periodic(amplitude: f64, period: f64) -> Self {
        ShockSchedule::Periodic {
            amplitude,
            period,
            site: Site::Local,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ShockSchedule::Explicit { shocks } => shocks.iter().try_for_each(Shock::validate),
            ShockSchedule::Periodic {
                amplitude, period, ..
            } => {
                Shock::new(0.0, *amplitude).validate()?;
                if !(period.is_finite() && *period > 0.0) {
                    return Err(Error::InvalidParam {
                        name: "period",
                        reason: format!("must be > 0, got {period}"),
                    });
                }
                Ok(())
            }
            ShockSchedule::Poisson {
                rate, amplitude, ..
            } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::InvalidParam {
                        name: "rate",
                        reason: format!("must be finite and > 0, got {rate}"),
                    });
                }
                amplitude.validate()
            }
        }
    }

    /// Seed stored in a Poisson schedule, zero otherwise.
    pub fn seed(&self) -> u64 {
        match self {
            ShockSchedule::Poisson { seed, .. } => *seed,
            _ => 0,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        if let ShockSchedule::Poisson { seed, .. } = &mut self {
            *seed = new_seed;
        }
        self
    }

    /// Mean number of events per unit time, when defined.
    pub fn event_rate(&self) -> Option<f64> {
        match self {
            ShockSchedule::Explicit { .. } => None,
            ShockSchedule::Periodic { period, .. } => Some(1.0 / period),
            ShockSchedule::Poisson { rate, .. } => Some(*rate),
        }
    }

    /// Realization with the schedule's own seed.
    pub fn realize_seeded(&self, horizon: f64) -> Result<Vec<Shock>> {
        realize(self, horizon, self.seed())
    }
}

/// Concrete, time-sorted shock list on `[0, horizon]`.
pub fn realize(schedule: &ShockSchedule, horizon: f64, seed: u64) -> Result<Vec<Shock>> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::BadHorizon(horizon));
    }
    schedule.validate()?;
    let out = match schedule {
        ShockSchedule::Explicit { shocks } => {
            let mut s: Vec<Shock> = shocks
                .iter()
                .filter(|s| s.time <= horizon)
                .cloned()
                .collect();
            s.sort_by(|a, b| a.time.total_cmp(&b.time));
            s
        }
        ShockSchedule::Periodic {
            amplitude,
            period,
            site,
        } => {
            let mut s = Vec::new();
            let mut i = 0u64;
            loop {
                let t = i as f64 * period;
                if t > horizon {
                    break;
                }
                s.push(Shock::at(t, *amplitude, site.clone()));
                i += 1;
            }
            s
        }
        ShockSchedule::Poisson {
            rate,
            amplitude,
            site,
            ..
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gap = Exp::new(*rate).expect("validated rate");
            let mut s = Vec::new();
            let mut t = 0.0;
            loop {
                t += gap.sample(&mut rng);
                if t > horizon {
                    break;
                }
                let a = amplitude.sample(&mut rng);
                s.push(Shock::at(t, a, site.clone()));
            }
            s
        }
    };
    Ok(out)
}

/// Adds the shock amplitude to the tension, leaving activity untouched.
pub fn apply_shock(state: SiteState, shock: &Shock) -> SiteState {
    SiteState {
        lambda: state.lambda,
        alpha: state.alpha + shock.amplitude,
    }
}

/// Node-indexed jump used by network integrators.
pub fn apply_node_shock(alpha: &mut [f64], shock: &Shock) -> Result<()> {
    match shock.site {
        Site::Node(i) => {
            let n = alpha.len();
            let slot = alpha
                .get_mut(i)
                .ok_or(Error::SiteOutOfRange { site: i, n })?;
            *slot += shock.amplitude;
            Ok(())
        }
        _ => Err(Error::MissingSite("node")),
    }
}
