//! Square-lattice stations with Boolean disk coverage.
//!
//! Queries scan every station; the lattice in the reference setup has 20
//! stations so a spatial index would not pay for itself.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Window};

pub type StationId = usize;

fn default_wrap() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// `[rows, cols]`.
    pub grid: [usize; 2],
    pub spacing: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_nbs: Option<f64>,
    /// Toroidal distances, removing boundary effects.
    #[serde(default = "default_wrap")]
    pub wrap: bool,
}

impl NetworkConfig {
    /// 4 × 5 lattice with unit spacing.
    pub fn lattice_4x5(target_nbs: f64) -> Self {
        NetworkConfig {
            grid: [4, 5],
            spacing: 1.0,
            radius: None,
            target_nbs: Some(target_nbs),
            wrap: true,
        }
    }

    pub fn station_count(&self) -> usize {
        self.grid[0] * self.grid[1]
    }

    pub fn window(&self) -> Window {
        Window {
            width: self.grid[1] as f64 * self.spacing,
            height: self.grid[0] as f64 * self.spacing,
        }
    }

    /// Largest radius for which a disk cannot reach the same station twice
    /// around the torus.
    pub fn max_wrapped_radius(&self) -> f64 {
        self.grid[0].min(self.grid[1]) as f64 * self.spacing / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.station_count() == 0 {
            return Err(Error::config("network.grid", "rows and cols must be at least 1"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::config("network.spacing", "must be positive"));
        }
        match (self.radius, self.target_nbs) {
            (Some(_), Some(_)) | (None, None) => Err(Error::config(
                "network.radius",
                "exactly one of radius and target_nbs must be given",
            )),
            (Some(r), None) => self.check_radius(r, "network.radius"),
            (None, Some(n)) => {
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::config("network.target_nbs", "must be positive"));
                }
                self.check_radius(self.spacing * (n / PI).sqrt(), "network.target_nbs")
            }
        }
    }

    fn check_radius(&self, r: f64, field: &str) -> Result<()> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::config(field, "radius must be positive"));
        }
        if self.wrap && r >= self.max_wrapped_radius() {
            return Err(Error::config(
                field,
                format!(
                    "radius {} must stay below half the lattice side {} when wrapping",
                    crate::format::sig(r, 6),
                    crate::format::sig(self.max_wrapped_radius(), 6)
                ),
            ));
        }
        Ok(())
    }

    pub fn radius(&self) -> Result<f64> {
        self.validate()?;
        match (self.radius, self.target_nbs) {
            (Some(r), _) => Ok(r),
            (None, Some(n)) => radius_for_target_nbs(n, self),
            _ => unreachable!("validated"),
        }
    }
}

/// `R_b = d · sqrt(N̄_bs / π)`.
pub fn radius_for_target_nbs(target_nbs: f64, config: &NetworkConfig) -> Result<f64> {
    if !(target_nbs > 0.0) {
        return Err(Error::config("network.target_nbs", "must be positive"));
    }
    let r = config.spacing * (target_nbs / PI).sqrt();
    config.check_radius(r, "network.target_nbs")?;
    Ok(r)
}

/// Analytic mean coverage number `π R_b² / d²` (exact on the torus).
pub fn mean_coverage_number(config: &NetworkConfig) -> Result<f64> {
    let r = config.radius()?;
    Ok(PI * r * r / (config.spacing * config.spacing))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station {
    pub id: StationId,
    pub position: Point,
}

/// Stations in row-major order, anchored at `(d/2, d/2)`.
pub fn build_lattice(config: &NetworkConfig) -> Vec<Station> {
    let [rows, cols] = config.grid;
    let d = config.spacing;
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .enumerate()
        .map(|(id, (r, c))| Station {
            id,
            position: Point::new((c as f64 + 0.5) * d, (r as f64 + 0.5) * d),
        })
        .collect()
}

/// Covering stations sorted by distance, ties broken by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverageSet {
    pub station_ids: Vec<StationId>,
    pub distances: Vec<f64>,
}

impl CoverageSet {
    pub fn m(&self) -> usize {
        self.station_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.station_ids.is_empty()
    }

    pub fn closest(&self) -> Option<StationId> {
        self.station_ids.first().copied()
    }

    pub fn from_sorted(station_ids: Vec<StationId>) -> Self {
        let distances = (0..station_ids.len()).map(|i| i as f64).collect();
        Self { station_ids, distances }
    }
}

fn plane_distance(a: Point, b: Point, window: &Window, wrap: bool) -> f64 {
    let mut dx = (a.x - b.x).abs();
    let mut dy = (a.y - b.y).abs();
    if wrap {
        dx = dx.min(window.width - dx);
        dy = dy.min(window.height - dy);
    }
    dx.hypot(dy)
}

#[derive(Debug, Clone)]
pub struct Network {
    pub config: NetworkConfig,
    pub stations: Vec<Station>,
    pub radius: f64,
    pub window: Window,
    scratch: Vec<(f64, StationId)>,
}

impl Network {
    pub fn new(config: &NetworkConfig) -> Result<Self> {
        let radius = config.radius()?;
        Ok(Self {
            config: config.clone(),
            stations: build_lattice(config),
            radius,
            window: config.window(),
            scratch: Vec::new(),
        })
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        plane_distance(a, b, &self.window, self.config.wrap)
    }

    /// Fills `out` with the stations within `R_b` of `point`.
    pub fn covering_into(&mut self, point: Point, out: &mut CoverageSet) {
        self.scratch.clear();
        for s in &self.stations {
            let d = plane_distance(point, s.position, &self.window, self.config.wrap);
            if d <= self.radius {
                self.scratch.push((d, s.id));
            }
        }
        self.scratch
            .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out.station_ids.clear();
        out.distances.clear();
        for &(d, id) in &self.scratch {
            out.station_ids.push(id);
            out.distances.push(d);
        }
    }

    pub fn coverage_count(&self, point: Point) -> usize {
        self.stations
            .iter()
            .filter(|s| self.distance(point, s.position) <= self.radius)
            .count()
    }
}

pub fn covering_stations(point: Point, network: &mut Network) -> CoverageSet {
    let mut out = CoverageSet::default();
    network.covering_into(point, &mut out);
    out
}

/// Monte Carlo histogram `p_0, …, p_mmax` of the coverage number at uniform
/// points.
pub fn estimate_pm<R: Rng + ?Sized>(network: &Network, n_samples: usize, rng: &mut R) -> Vec<f64> {
    let mut counts = vec![0u64; network.station_count() + 1];
    for _ in 0..n_samples {
        let p = Point::new(
            rng.random::<f64>() * network.window.width,
            rng.random::<f64>() * network.window.height,
        );
        counts[network.coverage_count(p)] += 1;
    }
    while counts.len() > 1 && *counts.last().unwrap() == 0 {
        counts.pop();
    }
    let n = n_samples.max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}
