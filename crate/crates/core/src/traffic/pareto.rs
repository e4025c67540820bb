//! Pareto samplers for content volumes and lifespans.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::open_unit;

/// Inverse-CDF draw from Pareto(`beta`, `x_min`) at the uniform `u ∈ (0, 1]`.
pub fn sample_pareto(beta: f64, x_min: f64, u: f64) -> Result<f64> {
    if !(beta > 0.0) || !(x_min > 0.0) {
        return Err(Error::domain(format!(
            "pareto parameters must be positive (beta={beta}, x_min={x_min})"
        )));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::domain(format!("uniform draw {u} outside (0, 1]")));
    }
    Ok(x_min * u.powf(-1.0 / beta))
}

/// Tail exponent giving continuous mean `volume_mean`: `E = β·V_min / (β − 1)`.
pub fn volume_beta_from_mean(volume_mean: f64, volume_min: f64) -> Result<f64> {
    if !(volume_min > 0.0) || !(volume_mean > volume_min) {
        return Err(Error::domain(format!(
            "volume mean {volume_mean} must exceed volume_min {volume_min} > 0"
        )));
    }
    Ok(volume_mean / (volume_mean - volume_min))
}

/// Continuous mean of Pareto(`beta`, `volume_min`); infinite for `beta <= 1`.
pub fn volume_mean_from_beta(beta: f64, volume_min: f64) -> f64 {
    if beta <= 1.0 {
        f64::INFINITY
    } else {
        beta * volume_min / (beta - 1.0)
    }
}

pub fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

pub fn sample_volume<R: Rng + ?Sized>(beta: f64, volume_min: f64, rng: &mut R) -> Result<u64> {
    let raw = sample_pareto(beta, volume_min, open_unit(rng))?;
    Ok(round_half_up(raw).max(1))
}

/// Statistics of the rounded volume `V = round_half_up(X)`, `X ~ Pareto(β, V_min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteVolume {
    pub beta: f64,
    pub volume_min: f64,
}

impl DiscreteVolume {
    fn raw_tail(&self, x: f64) -> f64 {
        if x <= self.volume_min {
            1.0
        } else {
            (self.volume_min / x).powf(self.beta)
        }
    }

    /// `P(V ≥ k) = P(X ≥ k − 1/2)`.
    pub fn tail(&self, k: u64) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.raw_tail(k as f64 - 0.5)
        }
    }

    pub fn prob_more_than_one(&self) -> f64 {
        self.tail(2)
    }

    /// `E[V] = Σ_{k≥1} P(V ≥ k)`, summed directly up to a cutoff and closed
    /// with an Euler–Maclaurin tail.
    pub fn mean(&self) -> f64 {
        if self.beta <= 1.0 {
            return f64::INFINITY;
        }
        const CUTOFF: u64 = 4096;
        let direct: f64 = (1..CUTOFF).map(|k| self.tail(k)).sum();
        let n = CUTOFF as f64 - 0.5;
        if n <= self.volume_min {
            // Degenerate scale far above the cutoff; fall back to a longer sum.
            let extra: f64 = (CUTOFF..CUTOFF * 64).map(|k| self.tail(k)).sum();
            return direct + extra;
        }
        let b = self.beta;
        let f = self.raw_tail(n);
        let integral = f * n / (b - 1.0);
        let d1 = -b * f / n;
        let d3 = -b * (b + 1.0) * (b + 2.0) * f / (n * n * n);
        direct + integral + f / 2.0 - d1 / 12.0 + d3 / 720.0
    }
}

/// Pareto(`beta`, `lo`) conditioned on `≤ hi`. `beta` may be zero (log-uniform)
/// or negative on the bounded support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPareto {
    pub beta: f64,
    pub lo: f64,
    pub hi: f64,
}

/// `expm1(a·L)/a`, continuous through `a = 0`.
fn scaled_expm1(a: f64, l: f64) -> f64 {
    let x = a * l;
    if x.abs() < 1e-8 {
        l * (1.0 + x / 2.0)
    } else {
        x.exp_m1() / a
    }
}

impl TruncatedPareto {
    pub fn new(beta: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || !beta.is_finite() {
            return Err(Error::domain(format!(
                "truncated pareto needs 0 < lo < hi and finite beta (lo={lo}, hi={hi}, beta={beta})"
            )));
        }
        Ok(Self { beta, lo, hi })
    }

    fn log_span(&self) -> f64 {
        (self.hi / self.lo).ln()
    }

    /// Inverse CDF on `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let l = self.log_span();
        let b = self.beta;
        // ln(t/lo) = −ln(1 + u·expm1(−βL)) / β, continuous at β = 0.
        let log_ratio = if (b * l).abs() < 1e-12 {
            u * l
        } else {
            -(u * (-b * l).exp_m1()).ln_1p() / b
        };
        (self.lo * log_ratio.exp()).clamp(self.lo, self.hi)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        if t >= self.hi {
            return 1.0;
        }
        let l = self.log_span();
        let x = (t / self.lo).ln();
        scaled_expm1(-self.beta, x) / scaled_expm1(-self.beta, l)
    }

    /// Closed-form mean `lo · h(1 − β) / h(−β)` with `h(a) = expm1(aL)/a`.
    pub fn mean(&self) -> f64 {
        let l = self.log_span();
        self.lo * scaled_expm1(1.0 - self.beta, l) / scaled_expm1(-self.beta, l)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

pub fn sample_lifespan<R: Rng + ?Sized>(
    beta_t: f64,
    tau_min: f64,
    tau_max: f64,
    rng: &mut R,
) -> Result<f64> {
    Ok(TruncatedPareto::new(beta_t, tau_min, tau_max)?.sample(rng))
}

pub const LIFESPAN_BETA_BRACKET: (f64, f64) = (-5.0, 5.0);

/// Root of `mean(β; τ_min, τ_max) = lifespan_mean` by bisection on the
/// bracket; the truncated mean is strictly decreasing in `β`.
pub fn lifespan_beta_from_mean(lifespan_mean: f64, tau_min: f64, tau_max: f64) -> Result<f64> {
    let (mut lo_b, mut hi_b) = LIFESPAN_BETA_BRACKET;
    let mean_at = |b: f64| TruncatedPareto::new(b, tau_min, tau_max).map(|d| d.mean());
    let mean_hi = mean_at(lo_b)?;
    let mean_lo = mean_at(hi_b)?;
    if !(lifespan_mean > mean_lo && lifespan_mean < mean_hi) {
        return Err(Error::NoRoot {
            target: lifespan_mean,
            lo: mean_lo,
            hi: mean_hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo_b + hi_b);
        let m = mean_at(mid)?;
        if m > lifespan_mean {
            lo_b = mid;
        } else {
            hi_b = mid;
        }
        if hi_b - lo_b < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo_b + hi_b))
}
