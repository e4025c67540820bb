//! Popularity shapes: where a content's requests fall inside its lifespan.
//!
//! Each non-uniform kind is a raw cumulative curve `F` on offsets
//! `x = t − t_i`, calibrated so the curve covers `1 − ε` of its mass over
//! `[0, τ_i]`, then truncated and renormalized onto that interval:
//!
//! | kind     | raw `F(x)`                    | calibration                         |
//! |----------|-------------------------------|-------------------------------------|
//! | NegExp   | `1 − exp(−λx)`                | `F(τ) = 1 − ε`                      |
//! | Logistic | `1 / (1 + exp(−λ(x − τ/2)))`  | `F(0) = ε/2`, `F(τ) = 1 − ε/2`      |
//! | Gompertz | `exp(−b·exp(−λx))`            | `F(0) = ε/2`, `F(τ) = 1 − ε/2`      |
//!
//! All three have closed-form inverses, so request times are drawn by
//! inverse transform.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Uniform,
    Logistic,
    Gompertz,
    NegExp,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [
        ShapeKind::Uniform,
        ShapeKind::Logistic,
        ShapeKind::Gompertz,
        ShapeKind::NegExp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeKind::Uniform => "uniform",
            ShapeKind::Logistic => "logistic",
            ShapeKind::Gompertz => "gompertz",
            ShapeKind::NegExp => "negexp",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown shape kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityShape {
    pub kind: ShapeKind,
    /// `t_i`, start of the support.
    pub start: f64,
    /// `τ_i`, length of the support.
    pub lifespan: f64,
    /// `λ` of the raw curve (1/days); zero for Uniform.
    pub rate: f64,
    /// Inflection offset of the logistic curve; zero otherwise.
    pub center: f64,
    /// Gompertz `b`; zero otherwise.
    pub curve_scale: f64,
    raw_lo: f64,
    raw_hi: f64,
}

pub fn make_shape(kind: ShapeKind, start: f64, lifespan: f64, epsilon: f64) -> Result<PopularityShape> {
    if !(lifespan > 0.0) || !lifespan.is_finite() {
        return Err(Error::domain(format!("lifespan must be positive, got {lifespan}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let (rate, center, curve_scale) = match kind {
        ShapeKind::Uniform => (0.0, 0.0, 0.0),
        ShapeKind::NegExp => (-epsilon.ln() / lifespan, 0.0, 0.0),
        ShapeKind::Logistic => {
            let rate = (2.0 / lifespan) * (2.0 / epsilon - 1.0).ln();
            (rate, lifespan / 2.0, 0.0)
        }
        ShapeKind::Gompertz => {
            let b = (2.0 / epsilon).ln();
            let rate = (b / -(-epsilon / 2.0).ln_1p()).ln() / lifespan;
            (rate, 0.0, b)
        }
    };
    let mut shape = PopularityShape {
        kind,
        start,
        lifespan,
        rate,
        center,
        curve_scale,
        raw_lo: 0.0,
        raw_hi: 1.0,
    };
    shape.raw_lo = shape.raw_cdf(0.0);
    shape.raw_hi = shape.raw_cdf(lifespan);
    Ok(shape)
}

impl PopularityShape {
    pub fn end(&self) -> f64 {
        self.start + self.lifespan
    }

    fn raw_cdf(&self, x: f64) -> f64 {
        match self.kind {
            ShapeKind::Uniform => x / self.lifespan,
            ShapeKind::NegExp => -(-self.rate * x).exp_m1(),
            ShapeKind::Logistic => 1.0 / (1.0 + (-self.rate * (x - self.center)).exp()),
            ShapeKind::Gompertz => (-self.curve_scale * (-self.rate * x).exp()).exp(),
        }
    }

    fn raw_pdf(&self, x: f64) -> f64 {
        match self.kind {
            ShapeKind::Uniform => 1.0 / self.lifespan,
            ShapeKind::NegExp => self.rate * (-self.rate * x).exp(),
            ShapeKind::Logistic => {
                let f = self.raw_cdf(x);
                self.rate * f * (1.0 - f)
            }
            ShapeKind::Gompertz => {
                let e = (-self.rate * x).exp();
                self.curve_scale * self.rate * e * (-self.curve_scale * e).exp()
            }
        }
    }

    fn raw_quantile(&self, q: f64) -> f64 {
        match self.kind {
            ShapeKind::Uniform => q * self.lifespan,
            ShapeKind::NegExp => -(-q).ln_1p() / self.rate,
            ShapeKind::Logistic => self.center + (q / (1.0 - q)).ln() / self.rate,
            ShapeKind::Gompertz => -((-q.ln()) / self.curve_scale).ln() / self.rate,
        }
    }

    fn mass(&self) -> f64 {
        self.raw_hi - self.raw_lo
    }

    /// Density `g_i(t)`, zero outside `[t_i, t_i + τ_i]`.
    pub fn pdf(&self, t: f64) -> f64 {
        if t < self.start || t > self.end() {
            return 0.0;
        }
        self.raw_pdf((t - self.start).min(self.lifespan)) / self.mass()
    }

    /// `G_i(s) = P(t ≤ s)`.
    pub fn cdf(&self, s: f64) -> f64 {
        let x = s - self.start;
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.lifespan {
            return 1.0;
        }
        let g = match self.kind {
            ShapeKind::NegExp => -(-self.rate * x).exp_m1() / self.mass(),
            _ => (self.raw_cdf(x) - self.raw_lo) / self.mass(),
        };
        g.clamp(0.0, 1.0)
    }

    /// Exact inverse of [`cdf`](Self::cdf) on `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        if p == 0.0 {
            return self.start;
        }
        if p == 1.0 {
            return self.end();
        }
        let x = match self.kind {
            ShapeKind::NegExp => -(-p * self.mass()).ln_1p() / self.rate,
            _ => self.raw_quantile(self.raw_lo + p * self.mass()),
        };
        self.start + x.clamp(0.0, self.lifespan)
    }
}

pub fn shape_cdf(shape: &PopularityShape, s: f64) -> f64 {
    shape.cdf(s)
}

pub fn shape_quantile(shape: &PopularityShape, p: f64) -> f64 {
    shape.quantile(p)
}
