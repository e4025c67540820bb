use serde::{Deserialize, Serialize};

use super::pareto::{
    lifespan_beta_from_mean, volume_beta_from_mean, volume_mean_from_beta, DiscreteVolume,
    TruncatedPareto,
};
use super::shape::ShapeKind;
use crate::error::{Error, Result};
use crate::geom::Window;

fn default_volume_min() -> f64 {
    0.5
}

fn default_epsilon() -> f64 {
    0.02
}

fn default_request_cap() -> f64 {
    1e8
}

/// Probability of each popularity shape being assigned to a new content.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapeMix {
    pub uniform: f64,
    pub logistic: f64,
    pub gompertz: f64,
    pub negexp: f64,
}

impl ShapeMix {
    pub fn only(kind: ShapeKind) -> Self {
        let mut mix = ShapeMix::default();
        match kind {
            ShapeKind::Uniform => mix.uniform = 1.0,
            ShapeKind::Logistic => mix.logistic = 1.0,
            ShapeKind::Gompertz => mix.gompertz = 1.0,
            ShapeKind::NegExp => mix.negexp = 1.0,
        }
        mix
    }

    /// Weights in `ShapeKind::ALL` order.
    pub fn weights(&self) -> [f64; 4] {
        [self.uniform, self.logistic, self.gompertz, self.negexp]
    }

    /// `uniform:logistic:gompertz:negexp`, as written to result tables.
    pub fn label(&self) -> String {
        self.weights()
            .iter()
            .map(|w| crate::format::sig(*w, 6))
            .collect::<Vec<_>>()
            .join(":")
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let w = self.weights();
        if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::config(field, format!("entries must be non-negative, found {bad}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::config(
                field,
                format!("entries sum to {}, expected 1", crate::format::sig(sum, 12)),
            ));
        }
        Ok(())
    }

    pub(crate) fn pick(&self, u: f64) -> ShapeKind {
        let mut acc = 0.0;
        let w = self.weights();
        for (kind, weight) in ShapeKind::ALL.into_iter().zip(w) {
            acc += weight;
            if u < acc {
                return kind;
            }
        }
        // u landed in the rounding gap at the top; take the last kind with mass.
        ShapeKind::ALL
            .into_iter()
            .zip(w)
            .rev()
            .find(|(_, w)| *w > 0.0)
            .map(|(k, _)| k)
            .unwrap_or(ShapeKind::Uniform)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    /// Content arrival intensity (objects/day).
    pub lambda_c: f64,
    /// Simulated span in days.
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_beta: Option<f64>,
    #[serde(default = "default_volume_min")]
    pub volume_min: f64,
    pub lifespan_mean: f64,
    pub lifespan_bounds: [f64; 2],
    pub shape_mix: ShapeMix,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Request window `[width, height]`; filled from the lattice when driven
    /// by an experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub master_seed: u64,
    /// Days of arrivals generated before `t = 0` so the catalogue is already
    /// stationary at the origin. Defaults to `τ_max`; `0` starts empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preroll: Option<f64>,
    /// Upper bound on the expected number of requests in a trace.
    #[serde(default = "default_request_cap")]
    pub request_cap: f64,
}

impl TrafficConfig {
    /// Desk-scale defaults: one tenth of the reference arrival rate over 150 days.
    pub fn desk_scale() -> Self {
        TrafficConfig {
            lambda_c: 240.0,
            horizon: 150.0,
            volume_mean: Some(2.1),
            volume_beta: None,
            volume_min: 0.5,
            lifespan_mean: 35.0,
            lifespan_bounds: [0.1, 96.0],
            shape_mix: ShapeMix {
                uniform: 0.0,
                logistic: 0.06,
                gompertz: 0.38,
                negexp: 0.56,
            },
            epsilon: 0.02,
            window: None,
            master_seed: 0,
            preroll: None,
            request_cap: default_request_cap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = |name: &str| format!("traffic.{name}");
        if !(self.lambda_c > 0.0 && self.lambda_c.is_finite()) {
            return Err(Error::config(f("lambda_c"), "must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config(f("horizon"), "must be positive"));
        }
        match (self.volume_mean, self.volume_beta) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::config(
                    f("volume_mean"),
                    "exactly one of volume_mean and volume_beta must be given",
                ))
            }
            (Some(m), None) if !(m > self.volume_min) => {
                return Err(Error::config(f("volume_mean"), "must exceed volume_min"))
            }
            (None, Some(b)) if !(b > 1.0 && b.is_finite()) => {
                return Err(Error::config(f("volume_beta"), "must exceed 1 for a finite mean"))
            }
            _ => {}
        }
        if !(self.volume_min >= 0.5 && self.volume_min.is_finite()) {
            return Err(Error::config(
                f("volume_min"),
                "must be at least 0.5 so rounded volumes are positive",
            ));
        }
        let [lo, hi] = self.lifespan_bounds;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::config(f("lifespan_bounds"), "need 0 < tau_min < tau_max"));
        }
        if !(self.lifespan_mean > lo && self.lifespan_mean < hi) {
            return Err(Error::config(
                f("lifespan_mean"),
                format!("must lie strictly inside ({lo}, {hi})"),
            ));
        }
        self.shape_mix.validate(&f("shape_mix"))?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config(f("epsilon"), "must lie in (0, 1)"));
        }
        if let Some([w, h]) = self.window {
            if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
                return Err(Error::config(f("window"), "width and height must be positive"));
            }
        }
        if let Some(p) = self.preroll {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::config(f("preroll"), "must be non-negative"));
            }
        }
        if !(self.request_cap > 0.0) {
            return Err(Error::config(f("request_cap"), "must be positive"));
        }
        Ok(())
    }

    pub fn volume_beta(&self) -> Result<f64> {
        match (self.volume_beta, self.volume_mean) {
            (Some(b), _) => Ok(b),
            (None, Some(m)) => volume_beta_from_mean(m, self.volume_min),
            (None, None) => Err(Error::config("traffic.volume_mean", "missing")),
        }
    }

    /// Mean of the continuous Pareto volume, before rounding.
    pub fn nominal_volume_mean(&self) -> Result<f64> {
        match self.volume_mean {
            Some(m) => Ok(m),
            None => Ok(volume_mean_from_beta(self.volume_beta()?, self.volume_min)),
        }
    }

    pub fn discrete_volume(&self) -> Result<DiscreteVolume> {
        Ok(DiscreteVolume {
            beta: self.volume_beta()?,
            volume_min: self.volume_min,
        })
    }

    pub fn lifespan_distribution(&self) -> Result<TruncatedPareto> {
        let [lo, hi] = self.lifespan_bounds;
        let beta = lifespan_beta_from_mean(self.lifespan_mean, lo, hi)?;
        TruncatedPareto::new(beta, lo, hi)
    }

    pub fn preroll_days(&self) -> f64 {
        self.preroll.unwrap_or(self.lifespan_bounds[1])
    }

    pub fn window(&self) -> Result<Window> {
        let [width, height] = self
            .window
            .ok_or_else(|| Error::config("traffic.window", "request window not set"))?;
        Ok(Window { width, height })
    }
}

/// A validated traffic configuration with its derived distribution parameters.
#[derive(Debug, Clone)]
pub struct TrafficModel {
    pub config: TrafficConfig,
    pub volume_beta: f64,
    pub lifespan: TruncatedPareto,
    pub window: Window,
}

impl TrafficModel {
    pub fn new(config: &TrafficConfig) -> Result<Self> {
        config.validate()?;
        let window = config.window()?;
        let volume_beta = config.volume_beta()?;
        let lifespan = config.lifespan_distribution()?;
        Ok(Self {
            config: config.clone(),
            volume_beta,
            lifespan,
            window,
        })
    }
}
