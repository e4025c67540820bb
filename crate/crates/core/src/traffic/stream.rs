//! Time-ordered request stream.
//!
//! Contents are generated lazily as the arrival process reaches them, and
//! their sorted request lists are merged through a min-heap, so memory is
//! bounded by the number of active contents rather than the trace length.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, VecDeque};

use rand_chacha::ChaCha8Rng;

use super::config::{TrafficConfig, TrafficModel};
use super::content::{Content, ContentId, Request};
use crate::error::{Error, Result};
use crate::rng::{open_unit, substream, Role};

#[derive(Debug, Clone, Copy)]
struct Cursor {
    time: f64,
    content: ContentId,
    index: usize,
}

impl PartialEq for Cursor {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cursor {}

impl PartialOrd for Cursor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cursor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.content.cmp(&other.content))
            .then(self.index.cmp(&other.index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct EndTime(f64);

impl Eq for EndTime {}

impl PartialOrd for EndTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EndTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Counts contents with `V > 1` whose lifespan covers a tick.
#[derive(Debug, Default)]
struct CatalogueTracker {
    ends: BinaryHeap<Reverse<EndTime>>,
    recent_arrivals: VecDeque<f64>,
}

impl CatalogueTracker {
    fn admit(&mut self, content: &Content) {
        if content.volume > 1 {
            self.ends.push(Reverse(EndTime(content.end())));
            self.recent_arrivals.push_back(content.t_arrival);
        }
    }

    fn size_at(&mut self, tick: f64) -> usize {
        while let Some(Reverse(EndTime(end))) = self.ends.peek() {
            if *end <= tick {
                self.ends.pop();
            } else {
                break;
            }
        }
        while self.recent_arrivals.front().is_some_and(|&t| t <= tick) {
            self.recent_arrivals.pop_front();
        }
        self.ends.len() - self.recent_arrivals.len()
    }
}

/// Iterator over the requests of one trace in nondecreasing time order.
pub struct TraceStream {
    model: TrafficModel,
    arrivals: ChaCha8Rng,
    next_arrival: Option<f64>,
    next_id: ContentId,
    heap: BinaryHeap<Reverse<Cursor>>,
    active: HashMap<ContentId, Content>,
    catalogue: CatalogueTracker,
    contents_generated: u64,
    error: Option<Error>,
}

impl std::fmt::Debug for TraceStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TraceStream")
            .field("next_arrival", &self.next_arrival)
            .field("next_id", &self.next_id)
            .field("active", &self.active.len())
            .finish()
    }
}

/// Validates `config` and returns its request stream.
pub fn generate_trace(config: &TrafficConfig) -> Result<TraceStream> {
    let model = TrafficModel::new(config)?;
    let expected = config.lambda_c * config.horizon * model.config.discrete_volume()?.mean();
    if expected > config.request_cap {
        return Err(Error::ResourceCap {
            expected,
            cap: config.request_cap,
        });
    }
    Ok(TraceStream::new(model))
}

impl TraceStream {
    pub fn new(model: TrafficModel) -> Self {
        let arrivals = substream(model.config.master_seed, Role::Arrivals, 0);
        let start = -model.config.preroll_days();
        let mut stream = TraceStream {
            model,
            arrivals,
            next_arrival: None,
            next_id: 0,
            heap: BinaryHeap::new(),
            active: HashMap::new(),
            catalogue: CatalogueTracker::default(),
            contents_generated: 0,
            error: None,
        };
        stream.next_arrival = stream.draw_arrival(start);
        stream
    }

    pub fn model(&self) -> &TrafficModel {
        &self.model
    }

    pub fn horizon(&self) -> f64 {
        self.model.config.horizon
    }

    /// Contents generated so far, including the pre-roll.
    pub fn contents_generated(&self) -> u64 {
        self.contents_generated
    }

    /// First error raised while generating a content, if any. The stream ends
    /// early when this is set.
    pub fn take_error(&mut self) -> Option<Error> {
        self.error.take()
    }

    fn draw_arrival(&mut self, after: f64) -> Option<f64> {
        let gap = -open_unit(&mut self.arrivals).ln() / self.model.config.lambda_c;
        let t = after + gap;
        (t < self.model.config.horizon).then_some(t)
    }

    fn admit_next(&mut self) -> Result<()> {
        let Some(t_arrival) = self.next_arrival else {
            return Ok(());
        };
        let id = self.next_id;
        self.next_id += 1;
        self.contents_generated += 1;
        self.next_arrival = self.draw_arrival(t_arrival);
        let content = self.model.content(id, t_arrival)?;
        self.catalogue.admit(&content);
        let first = content.request_times.partition_point(|&t| t < 0.0);
        if first < content.request_times.len() {
            self.heap.push(Reverse(Cursor {
                time: content.request_times[first],
                content: id,
                index: first,
            }));
            self.active.insert(id, content);
        }
        Ok(())
    }

    fn admit_through(&mut self, t: f64) {
        while self.error.is_none() && self.next_arrival.is_some_and(|a| a <= t) {
            if let Err(e) = self.admit_next() {
                self.error = Some(e);
            }
        }
    }

    /// Active catalogue size at `tick`: contents with `V > 1` and
    /// `t_i ≤ tick < t_i + τ_i`. Ticks must be queried in nondecreasing order.
    pub fn catalogue_size_at(&mut self, tick: f64) -> usize {
        self.admit_through(tick);
        self.catalogue.size_at(tick)
    }
}

impl Iterator for TraceStream {
    type Item = Request;

    fn next(&mut self) -> Option<Request> {
        loop {
            if self.error.is_some() {
                return None;
            }
            let top = self.heap.peek().map(|Reverse(c)| c.time);
            match (self.next_arrival, top) {
                (Some(a), Some(t)) if a <= t => self.admit_through(a),
                (Some(a), None) => self.admit_through(a),
                (_, None) => return None,
                _ => break,
            }
        }
        let Reverse(cursor) = self.heap.pop()?;
        if cursor.time >= self.model.config.horizon {
            self.heap.clear();
            self.active.clear();
            return None;
        }
        let content = self.active.get(&cursor.content).expect("active content");
        let request = Request {
            time: cursor.time,
            content_id: cursor.content,
            position: content.positions[cursor.index],
        };
        let next = cursor.index + 1;
        if next < content.request_times.len() {
            let time = content.request_times[next];
            self.heap.push(Reverse(Cursor {
                time,
                content: cursor.content,
                index: next,
            }));
        } else {
            self.active.remove(&cursor.content);
        }
        Some(request)
    }
}
