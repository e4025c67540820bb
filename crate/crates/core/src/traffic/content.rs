use rand::Rng;

use super::config::TrafficModel;
use super::pareto::sample_volume;
use super::shape::{make_shape, PopularityShape, ShapeKind};
use crate::error::Result;
use crate::geom::{Point, Window};
use crate::rng::{substream, Role};

pub type ContentId = u64;

/// One catalogue object with its realized requests.
#[derive(Debug, Clone, PartialEq)]
pub struct Content {
    pub id: ContentId,
    pub t_arrival: f64,
    pub lifespan: f64,
    pub volume: u64,
    pub shape: ShapeKind,
    /// Nondecreasing, `request_times[0] == t_arrival`.
    pub request_times: Vec<f64>,
    pub positions: Vec<Point>,
}

impl Content {
    pub fn end(&self) -> f64 {
        self.t_arrival + self.lifespan
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub time: f64,
    pub content_id: ContentId,
    pub position: Point,
}

/// The first request at `t_i`, then `v − 1` independent draws from the shape,
/// sorted.
pub fn place_requests<R: Rng + ?Sized>(
    t_arrival: f64,
    volume: u64,
    shape: &PopularityShape,
    rng: &mut R,
) -> Vec<f64> {
    let extra = volume.saturating_sub(1) as usize;
    let mut times = Vec::with_capacity(extra + 1);
    times.push(t_arrival);
    let end = shape.end();
    let mut draws: Vec<f64> = (0..extra)
        .map(|_| {
            let t = shape.quantile(rng.random::<f64>());
            if t >= end {
                end.next_down()
            } else {
                t
            }
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    times.extend(draws);
    times
}

fn uniform_point<R: Rng + ?Sized>(window: &Window, rng: &mut R) -> Point {
    Point::new(
        rng.random::<f64>() * window.width,
        rng.random::<f64>() * window.height,
    )
}

impl TrafficModel {
    /// Regenerates content `id` arriving at `t_arrival`. Pure in
    /// `(master_seed, id, t_arrival)`.
    pub fn content(&self, id: ContentId, t_arrival: f64) -> Result<Content> {
        let mut rng = substream(self.config.master_seed, Role::Content, id);
        let shape_kind = self.config.shape_mix.pick(rng.random::<f64>());
        let lifespan = self.lifespan.sample(&mut rng);
        let volume = sample_volume(self.volume_beta, self.config.volume_min, &mut rng)?;
        let shape = make_shape(shape_kind, t_arrival, lifespan, self.config.epsilon)?;
        let request_times = place_requests(t_arrival, volume, &shape, &mut rng);
        let positions = (0..request_times.len())
            .map(|_| uniform_point(&self.window, &mut rng))
            .collect();
        Ok(Content {
            id,
            t_arrival,
            lifespan,
            volume,
            shape: shape_kind,
            request_times,
            positions,
        })
    }
}
