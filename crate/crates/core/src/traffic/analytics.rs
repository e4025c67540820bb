//! Closed-form traffic predictors.

use super::config::TrafficConfig;
use crate::error::Result;

/// Mean active catalogue size `λ_c · P(V>1) · E[T]`.
pub fn mean_catalogue_size(lambda_c: f64, prob_more_than_one: f64, lifespan_mean: f64) -> f64 {
    lambda_c * prob_more_than_one * lifespan_mean
}

/// Mean number of requests in `[0, span]`: `span · λ_c · E[V]`.
pub fn mean_total_requests(lambda_c: f64, volume_mean: f64, span: f64) -> f64 {
    span * lambda_c * volume_mean
}

/// Cache-to-catalogue-size ratio `ρ = K / (λ_c · E[T])`.
pub fn ccsr(capacity: f64, lambda_c: f64, lifespan_mean: f64) -> f64 {
    capacity / (lambda_c * lifespan_mean)
}

/// Capacity achieving a target `ρ`, rounded to the nearest slot.
pub fn capacity_for_ccsr(rho: f64, lambda_c: f64, lifespan_mean: f64) -> usize {
    (rho * lambda_c * lifespan_mean).round().max(0.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficSummary {
    pub volume_beta: f64,
    pub lifespan_beta: f64,
    /// `P(V > 1)` under half-up rounding.
    pub prob_more_than_one: f64,
    /// Target mean of the continuous Pareto volume.
    pub volume_mean_nominal: f64,
    /// Mean of the rounded volume actually generated.
    pub volume_mean_discrete: f64,
    pub catalogue_mean: f64,
    pub requests_per_day_nominal: f64,
    pub requests_per_day: f64,
}

impl TrafficConfig {
    pub fn summary(&self) -> Result<TrafficSummary> {
        let dv = self.discrete_volume()?;
        let lifespan = self.lifespan_distribution()?;
        let prob_more_than_one = dv.prob_more_than_one();
        let nominal = self.nominal_volume_mean()?;
        let discrete = dv.mean();
        Ok(TrafficSummary {
            volume_beta: dv.beta,
            lifespan_beta: lifespan.beta,
            prob_more_than_one,
            volume_mean_nominal: nominal,
            volume_mean_discrete: discrete,
            catalogue_mean: mean_catalogue_size(self.lambda_c, prob_more_than_one, self.lifespan_mean),
            requests_per_day_nominal: mean_total_requests(self.lambda_c, nominal, 1.0),
            requests_per_day: mean_total_requests(self.lambda_c, discrete, 1.0),
        })
    }

    /// Expected requests in `[0, span]` for the generated (rounded) volumes.
    pub fn expected_requests(&self, span: f64) -> Result<f64> {
        Ok(mean_total_requests(self.lambda_c, self.discrete_volume()?.mean(), span))
    }
}
