//! Measurement rules and the result row schema.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::format::sig;
use crate::policies::PolicyOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricRule {
    /// Only requests covered by at least one station enter the denominator.
    #[default]
    CoveredOnly,
    /// Uncovered requests count as misses.
    AllRequests,
}

impl std::str::FromStr for MetricRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "covered-only" => Ok(MetricRule::CoveredOnly),
            "all-requests" => Ok(MetricRule::AllRequests),
            other => Err(format!("unknown metric rule `{other}` (covered-only | all-requests)")),
        }
    }
}

/// Which requests are scored: those at or after `start`, filtered by `rule`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub start: f64,
    pub rule: MetricRule,
}

impl Measurement {
    pub fn everything() -> Self {
        Self {
            start: f64::NEG_INFINITY,
            rule: MetricRule::AllRequests,
        }
    }

    pub fn counts(&self, time: f64, m: usize) -> bool {
        time >= self.start && (m > 0 || self.rule == MetricRule::AllRequests)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HitTally {
    pub measured: u64,
    pub hits: u64,
}

impl HitTally {
    pub fn record(&mut self, measurement: &Measurement, time: f64, outcome: &PolicyOutcome) {
        if measurement.counts(time, outcome.m) {
            self.measured += 1;
            if outcome.hit {
                self.hits += 1;
            }
        }
    }

    pub fn hit_prob(&self) -> f64 {
        if self.measured == 0 {
            0.0
        } else {
            self.hits as f64 / self.measured as f64
        }
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub policy: String,
    pub seed: u64,
    pub nbs_target: f64,
    pub radius: f64,
    pub capacity: usize,
    pub rho: f64,
    pub volume_mean: f64,
    pub lifespan_mean: f64,
    pub shape_mix: String,
    pub requests_total: u64,
    pub requests_measured: u64,
    pub covered_fraction: f64,
    pub hits: u64,
    pub hit_prob: f64,
    pub catalogue_mean_empirical: f64,
    pub catalogue_mean_analytic: f64,
    /// Popularity window used by the POP bound; `None` for other strategies.
    pub dt_pop: Option<f64>,
    pub runtime_seconds: f64,
}

pub const CSV_HEADER: [&str; 18] = [
    "policy",
    "seed",
    "nbs_target",
    "radius",
    "K",
    "rho",
    "volume_mean",
    "lifespan_mean",
    "shape_mix",
    "requests_total",
    "requests_measured",
    "covered_fraction",
    "hits",
    "hit_prob",
    "catalogue_mean_empirical",
    "catalogue_mean_analytic",
    "dt_pop",
    "runtime_seconds",
];

impl MetricsRow {
    pub fn csv_fields(&self) -> [String; 18] {
        let f = |x: f64| sig(x, 6);
        [
            self.policy.clone(),
            self.seed.to_string(),
            f(self.nbs_target),
            f(self.radius),
            self.capacity.to_string(),
            f(self.rho),
            f(self.volume_mean),
            f(self.lifespan_mean),
            self.shape_mix.clone(),
            self.requests_total.to_string(),
            self.requests_measured.to_string(),
            f(self.covered_fraction),
            self.hits.to_string(),
            f(self.hit_prob),
            f(self.catalogue_mean_empirical),
            f(self.catalogue_mean_analytic),
            self.dt_pop.map(f).unwrap_or_default(),
            f(self.runtime_seconds),
        ]
    }
}

/// Writes the header and rows, comma-separated with `\n` line endings.
pub fn write_csv<W: Write>(mut out: W, rows: &[MetricsRow]) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.csv_fields().join(","))?;
    }
    out.flush()
}

pub fn to_csv_string(rows: &[MetricsRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("write to memory");
    String::from_utf8(buf).expect("ascii output")
}
