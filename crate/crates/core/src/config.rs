//! Experiment files: a JSON base configuration plus sweep axes, expanded
//! into the cartesian product of resolved points.

use serde::{Deserialize, Serialize};

use crate::coverage::NetworkConfig;
use crate::engine::{ExperimentConfig, PopSettings, DEFAULT_WARMUP_FRACTION};
use crate::error::{Error, Result};
use crate::metrics::MetricRule;
use crate::policies::StrategyRegistry;
use crate::traffic::{capacity_for_ccsr, ShapeMix, TrafficConfig};

/// Either an explicit list or a count `n` meaning seeds `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (1..=*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(10)
    }
}

/// Each non-empty axis multiplies the grid. Axes are applied in declaration
/// order, outermost first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepAxes {
    pub shape_mix: Vec<ShapeMix>,
    pub volume_mean: Vec<f64>,
    pub lifespan_mean: Vec<f64>,
    pub capacity: Vec<usize>,
    pub rho: Vec<f64>,
    pub target_nbs: Vec<f64>,
    pub radius: Vec<f64>,
}

fn default_warmup() -> f64 {
    DEFAULT_WARMUP_FRACTION
}

fn default_traffic() -> TrafficConfig {
    TrafficConfig::desk_scale()
}

fn default_network() -> NetworkConfig {
    NetworkConfig {
        grid: [4, 5],
        spacing: 1.0,
        radius: None,
        target_nbs: None,
        wrap: true,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub label: String,
    #[serde(default = "default_traffic")]
    pub traffic: TrafficConfig,
    #[serde(default = "default_network")]
    pub network: NetworkConfig,
    pub policies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default)]
    pub pop: PopSettings,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    #[serde(default)]
    pub metric_rule: MetricRule,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub sweep: SweepAxes,
}

#[derive(Debug, Clone, Copy)]
enum Size {
    Capacity(usize),
    Rho(f64),
}

#[derive(Debug, Clone, Copy)]
enum Reach {
    Nbs(f64),
    Radius(f64),
}

fn axis<T: Copy>(values: &[T], base: Option<T>) -> Vec<Option<T>> {
    if values.is_empty() {
        vec![base]
    } else {
        values.iter().copied().map(Some).collect()
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Expands the sweep into validated points.
    pub fn expand(&self, registry: &StrategyRegistry) -> Result<Vec<ExperimentConfig>> {
        let ax = &self.sweep;
        if self.capacity.is_some() && self.rho.is_some() {
            return Err(Error::config("rho", "give either capacity or rho, not both"));
        }
        if !ax.capacity.is_empty() && !ax.rho.is_empty() {
            return Err(Error::config("sweep.rho", "cannot sweep both capacity and rho"));
        }
        if !ax.target_nbs.is_empty() && !ax.radius.is_empty() {
            return Err(Error::config("sweep.radius", "cannot sweep both target_nbs and radius"));
        }

        let sizes: Vec<Option<Size>> = if !ax.rho.is_empty() {
            ax.rho.iter().map(|r| Some(Size::Rho(*r))).collect()
        } else if !ax.capacity.is_empty() {
            ax.capacity.iter().map(|k| Some(Size::Capacity(*k))).collect()
        } else {
            vec![self.capacity.map(Size::Capacity).or(self.rho.map(Size::Rho))]
        };
        if sizes.iter().any(Option::is_none) {
            return Err(Error::config("capacity", "set capacity, rho, or sweep one of them"));
        }
        let reaches: Vec<Option<Reach>> = if !ax.radius.is_empty() {
            ax.radius.iter().map(|r| Some(Reach::Radius(*r))).collect()
        } else if !ax.target_nbs.is_empty() {
            ax.target_nbs.iter().map(|n| Some(Reach::Nbs(*n))).collect()
        } else {
            vec![None]
        };

        let seeds = self.seeds.resolve();
        let mut points = Vec::new();
        for mix in axis(&ax.shape_mix, None) {
            for vmean in axis(&ax.volume_mean, None) {
                for tmean in axis(&ax.lifespan_mean, None) {
                    for size in &sizes {
                        for reach in &reaches {
                            let mut tags = Vec::new();
                            let mut traffic = self.traffic.clone();
                            if let Some(m) = mix {
                                tags.push(format!("mix={}", m.label()));
                                traffic.shape_mix = m;
                            }
                            if let Some(v) = vmean {
                                tags.push(format!("EV={v}"));
                                traffic.volume_mean = Some(v);
                                traffic.volume_beta = None;
                            }
                            if let Some(t) = tmean {
                                tags.push(format!("ET={t}"));
                                traffic.lifespan_mean = t;
                            }
                            let capacity = match size.expect("checked above") {
                                Size::Capacity(k) => k,
                                Size::Rho(r) => {
                                    if !(r >= 0.0 && r.is_finite()) {
                                        return Err(Error::config("rho", "must be non-negative"));
                                    }
                                    tags.push(format!("rho={r}"));
                                    capacity_for_ccsr(r, traffic.lambda_c, traffic.lifespan_mean)
                                }
                            };
                            tags.push(format!("K={capacity}"));
                            let mut network = self.network.clone();
                            match reach {
                                Some(Reach::Nbs(n)) => {
                                    tags.push(format!("nbs={n}"));
                                    network.target_nbs = Some(*n);
                                    network.radius = None;
                                }
                                Some(Reach::Radius(r)) => {
                                    tags.push(format!("R={r}"));
                                    network.radius = Some(*r);
                                    network.target_nbs = None;
                                }
                                None => {}
                            }
                            let label = if self.label.is_empty() {
                                tags.join(" ")
                            } else {
                                format!("{} {}", self.label, tags.join(" "))
                            };
                            let point = ExperimentConfig {
                                label,
                                traffic,
                                network,
                                policies: self.policies.clone(),
                                capacity,
                                pop: self.pop.clone(),
                                warmup_fraction: self.warmup_fraction,
                                metric_rule: self.metric_rule,
                                seeds: seeds.clone(),
                            };
                            point.validate(registry)?;
                            points.push(point);
                        }
                    }
                }
            }
        }
        Ok(points)
    }
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// Parses and expands an experiment file. Semantic errors name the line of
/// the offending key when it can be found.
pub fn load_experiments(text: &str, registry: &StrategyRegistry) -> Result<Vec<ExperimentConfig>> {
    let file = ConfigFile::from_json(text)?;
    file.expand(registry).map_err(|e| match e {
        Error::Config { field, message } => {
            let key = field.rsplit('.').next().unwrap_or(&field).to_string();
            match key_line(text, &key) {
                Some(line) => Error::Config {
                    field,
                    message: format!("{message} (line {line})"),
                },
                None => Error::Config { field, message },
            }
        }
        other => other,
    })
}
