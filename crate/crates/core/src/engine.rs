//! Trace replay and experiment sweeps.
//!
//! A run streams one trace through every requested strategy at once, so all
//! rows of a `(point, seed)` pair see identical traffic. Sweeps fan the
//! `(point, seed)` jobs out over a thread pool; rows come back in job order
//! regardless of scheduling.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{stopping_rule_index, PopBound, PopConfig, POP_BOUND};
use crate::coverage::{CoverageSet, Network, NetworkConfig};
use crate::error::{Error, Result};
use crate::metrics::{HitTally, Measurement, MetricRule, MetricsRow};
use crate::policies::{PolicyOutcome, Strategy, StrategyContext, StrategyRegistry};
use crate::traffic::{ccsr, generate_trace, Request, TrafficConfig};

pub const DEFAULT_WARMUP_FRACTION: f64 = 0.2;

/// Popularity window for the POP bound: one value, or ascending candidates
/// searched with the stopping rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtPop {
    Fixed(f64),
    Candidates(Vec<f64>),
}

impl DtPop {
    pub fn candidates(&self) -> Vec<f64> {
        match self {
            DtPop::Fixed(x) => vec![*x],
            DtPop::Candidates(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopSettings {
    pub dt_ev: f64,
    pub dt_pop: DtPop,
}

impl Default for PopSettings {
    fn default() -> Self {
        Self {
            dt_ev: 1.0,
            dt_pop: DtPop::Fixed(5.0),
        }
    }
}

impl PopSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_ev > 0.0 && self.dt_ev.is_finite()) {
            return Err(Error::config("pop.dt_ev", "must be positive"));
        }
        let c = self.dt_pop.candidates();
        if c.is_empty() {
            return Err(Error::config("pop.dt_pop", "needs at least one value"));
        }
        if c.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::config("pop.dt_pop", "values must be positive"));
        }
        if c.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("pop.dt_pop", "candidates must be strictly ascending"));
        }
        Ok(())
    }
}

/// One fully resolved sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub label: String,
    pub traffic: TrafficConfig,
    pub network: NetworkConfig,
    pub policies: Vec<String>,
    pub capacity: usize,
    pub pop: PopSettings,
    pub warmup_fraction: f64,
    pub metric_rule: MetricRule,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    /// Desk-scale defaults on the 4 × 5 lattice.
    pub fn desk_scale(target_nbs: f64, capacity: usize, policies: &[&str]) -> Self {
        Self {
            label: String::new(),
            traffic: TrafficConfig::desk_scale(),
            network: NetworkConfig::lattice_4x5(target_nbs),
            policies: policies.iter().map(|s| s.to_string()).collect(),
            capacity,
            pop: PopSettings::default(),
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            metric_rule: MetricRule::CoveredOnly,
            seeds: (1..=10).collect(),
        }
    }

    pub fn validate(&self, registry: &StrategyRegistry) -> Result<()> {
        self.traffic.validate()?;
        self.network.validate()?;
        if let Some([w, h]) = self.traffic.window {
            let win = self.network.window();
            if (w, h) != (win.width, win.height) {
                return Err(Error::config(
                    "traffic.window",
                    "must match the lattice window or be omitted",
                ));
            }
        }
        if self.policies.is_empty() {
            return Err(Error::config("policies", "at least one policy is required"));
        }
        if let Some(bad) = self.policies.iter().find(|p| !registry.contains(p)) {
            let known: Vec<&str> = registry.names().collect();
            return Err(Error::config(
                "policies",
                format!("unknown policy `{bad}` (known: {})", known.join(", ")),
            ));
        }
        self.pop.validate()?;
        if !(0.0..=0.9).contains(&self.warmup_fraction) {
            return Err(Error::config("warmup_fraction", "must lie in [0, 0.9]"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        Ok(())
    }

    pub fn measurement_start(&self) -> f64 {
        self.warmup_fraction * self.traffic.horizon
    }

    pub fn measurement(&self) -> Measurement {
        Measurement {
            start: self.measurement_start(),
            rule: self.metric_rule,
        }
    }

    fn traffic_for_seed(&self, seed: u64) -> TrafficConfig {
        let win = self.network.window();
        let mut traffic = self.traffic.clone();
        traffic.window = Some([win.width, win.height]);
        traffic.master_seed = seed;
        traffic
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fill `runtime_seconds`; off by default so output is reproducible.
    pub record_timing: bool,
}

struct Slot {
    policy: usize,
    dt_pop: Option<f64>,
    strategy: Box<dyn Strategy>,
    tally: HitTally,
}

fn build_slots(config: &ExperimentConfig, stations: usize, registry: &StrategyRegistry) -> Result<Vec<Slot>> {
    let mut slots = Vec::new();
    for (policy, name) in config.policies.iter().enumerate() {
        if name == POP_BOUND {
            for dt_pop in config.pop.dt_pop.candidates() {
                let pop = PopConfig { dt_ev: config.pop.dt_ev, dt_pop };
                slots.push(Slot {
                    policy,
                    dt_pop: Some(dt_pop),
                    strategy: Box::new(PopBound::new(pop, config.capacity)),
                    tally: HitTally::default(),
                });
            }
        } else {
            let ctx = StrategyContext {
                stations,
                capacity: config.capacity,
                pop: PopConfig {
                    dt_ev: config.pop.dt_ev,
                    dt_pop: config.pop.dt_pop.candidates()[0],
                },
            };
            slots.push(Slot {
                policy,
                dt_pop: None,
                strategy: registry.create(name, &ctx)?,
                tally: HitTally::default(),
            });
        }
    }
    Ok(slots)
}

/// Raw counters of one pass, before being shaped into rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub requests_total: u64,
    pub requests_after_warmup: u64,
    pub covered_after_warmup: u64,
    pub catalogue_samples: Vec<usize>,
    pub radius: f64,
    /// `(policy index, dt_pop, tally)` per strategy instance.
    pub tallies: Vec<(usize, Option<f64>, HitTally)>,
    pub elapsed_seconds: f64,
}

impl RunSummary {
    pub fn catalogue_mean(&self) -> f64 {
        if self.catalogue_samples.is_empty() {
            return 0.0;
        }
        self.catalogue_samples.iter().sum::<usize>() as f64 / self.catalogue_samples.len() as f64
    }
}

/// Streams the trace for `seed` through every configured strategy. The
/// observer sees each outcome with its policy index, in request order.
pub fn replay<F>(
    config: &ExperimentConfig,
    seed: u64,
    registry: &StrategyRegistry,
    mut observer: F,
) -> Result<RunSummary>
where
    F: FnMut(usize, &Request, &PolicyOutcome),
{
    config.validate(registry)?;
    let started = Instant::now();
    let mut network = Network::new(&config.network)?;
    let mut stream = generate_trace(&config.traffic_for_seed(seed))?;
    let mut slots = build_slots(config, network.station_count(), registry)?;
    let measurement = config.measurement();
    let horizon = config.traffic.horizon;

    let mut next_tick = measurement.start.ceil();
    let mut catalogue_samples = Vec::new();
    let mut coverage = CoverageSet::default();
    let (mut total, mut after_warmup, mut covered) = (0u64, 0u64, 0u64);

    while let Some(request) = stream.next() {
        while next_tick <= request.time && next_tick < horizon {
            catalogue_samples.push(stream.catalogue_size_at(next_tick));
            next_tick += 1.0;
        }
        network.covering_into(request.position, &mut coverage);
        total += 1;
        if request.time >= measurement.start {
            after_warmup += 1;
            if !coverage.is_empty() {
                covered += 1;
            }
        }
        for slot in &mut slots {
            let outcome = slot.strategy.serve(&request, &coverage);
            slot.tally.record(&measurement, request.time, &outcome);
            observer(slot.policy, &request, &outcome);
        }
    }
    if let Some(e) = stream.take_error() {
        return Err(e);
    }
    while next_tick < horizon {
        catalogue_samples.push(stream.catalogue_size_at(next_tick));
        next_tick += 1.0;
    }

    Ok(RunSummary {
        requests_total: total,
        requests_after_warmup: after_warmup,
        covered_after_warmup: covered,
        catalogue_samples,
        radius: network.radius,
        tallies: slots.into_iter().map(|s| (s.policy, s.dt_pop, s.tally)).collect(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

/// One row per configured policy for `seed`.
pub fn run_once(
    config: &ExperimentConfig,
    seed: u64,
    registry: &StrategyRegistry,
    options: RunOptions,
) -> Result<Vec<MetricsRow>> {
    let summary = replay(config, seed, registry, |_, _, _| {})?;
    let traffic = &config.traffic;
    let analytic = traffic.summary()?;
    let nbs_target = config.network.target_nbs.unwrap_or_else(|| {
        std::f64::consts::PI * summary.radius * summary.radius
            / (config.network.spacing * config.network.spacing)
    });
    let covered_fraction = if summary.requests_after_warmup == 0 {
        0.0
    } else {
        summary.covered_after_warmup as f64 / summary.requests_after_warmup as f64
    };
    let catalogue = summary.catalogue_mean();

    let mut rows = Vec::with_capacity(config.policies.len());
    for (policy, name) in config.policies.iter().enumerate() {
        let group: Vec<&(usize, Option<f64>, HitTally)> =
            summary.tallies.iter().filter(|t| t.0 == policy).collect();
        let values: Vec<f64> = group.iter().map(|t| t.2.hit_prob()).collect();
        let (_, dt_pop, tally) = *group[stopping_rule_index(&values)];
        rows.push(MetricsRow {
            policy: name.clone(),
            seed,
            nbs_target,
            radius: summary.radius,
            capacity: config.capacity,
            rho: ccsr(config.capacity as f64, traffic.lambda_c, traffic.lifespan_mean),
            volume_mean: analytic.volume_mean_nominal,
            lifespan_mean: traffic.lifespan_mean,
            shape_mix: traffic.shape_mix.label(),
            requests_total: summary.requests_total,
            requests_measured: tally.measured,
            covered_fraction,
            hits: tally.hits,
            hit_prob: tally.hit_prob(),
            catalogue_mean_empirical: catalogue,
            catalogue_mean_analytic: analytic.catalogue_mean,
            dt_pop,
            runtime_seconds: if options.record_timing { summary.elapsed_seconds } else { 0.0 },
        });
    }
    Ok(rows)
}

/// Runs every `(point, seed)` pair, optionally on a dedicated pool of
/// `threads` workers, and returns rows ordered by point, seed, then policy.
pub fn run_sweep(
    points: &[ExperimentConfig],
    registry: &StrategyRegistry,
    threads: Option<usize>,
    options: RunOptions,
) -> Result<Vec<MetricsRow>> {
    if points.is_empty() {
        return Err(Error::config("sweep", "grid is empty"));
    }
    for p in points {
        p.validate(registry).map_err(|e| Error::Run {
            point: p.label.clone(),
            source: Box::new(e),
        })?;
    }
    let jobs: Vec<(&ExperimentConfig, u64)> = points
        .iter()
        .flat_map(|p| p.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let execute = || -> Vec<Result<Vec<MetricsRow>>> {
        jobs.par_iter()
            .map(|(p, seed)| {
                run_once(p, *seed, registry, options).map_err(|e| Error::Run {
                    point: format!("{} seed={seed}", p.label),
                    source: Box::new(e),
                })
            })
            .collect()
    };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(execute),
        None => execute(),
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => failures.push(e),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Sweep(failures));
    }
    Ok(rows)
}
