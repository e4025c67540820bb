//! Spatio-temporal request generation with temporal locality.
//!
//! Contents arrive as a homogeneous Poisson process. Each carries an
//! independent lifespan (truncated Pareto) and volume (rounded Pareto), and
//! its requests after the first are placed independently inside the lifespan
//! by a popularity shape. Every request lands uniformly in the window.

mod analytics;
mod config;
mod content;
mod pareto;
mod shape;
mod stream;

pub use analytics::{capacity_for_ccsr, ccsr, mean_catalogue_size, mean_total_requests, TrafficSummary};
pub use config::{ShapeMix, TrafficConfig, TrafficModel};
pub use content::{place_requests, Content, ContentId, Request};
pub use pareto::{
    lifespan_beta_from_mean, round_half_up, sample_lifespan, sample_pareto, sample_volume,
    volume_beta_from_mean, volume_mean_from_beta, DiscreteVolume, TruncatedPareto,
};
pub use shape::{make_shape, shape_cdf, shape_quantile, PopularityShape, ShapeKind};
pub use stream::{generate_trace, TraceStream};
