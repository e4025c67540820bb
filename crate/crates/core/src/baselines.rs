//! Comparison curves that are not LRU policies: an upper bound on any
//! centralized policy with periodic popularity updates, and the
//! cacheability limit.
//!
//! Both are streaming [`Strategy`] implementations so the engine can score
//! them on the same pass as the LRU policies. Batch helpers over a stored
//! trace are provided for analysis.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::CoverageSet;
use crate::geom::Point;
use crate::metrics::{HitTally, Measurement};
use crate::policies::{PolicyOutcome, Strategy, StrategyRegistry};
use crate::traffic::{ContentId, Request};

pub const POP_BOUND: &str = "pop-bound";
pub const CACHEABILITY: &str = "cacheability";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopConfig {
    /// Days between cache refreshes.
    pub dt_ev: f64,
    /// Length of the popularity-estimation window in days.
    pub dt_pop: f64,
}

impl Default for PopConfig {
    fn default() -> Self {
        Self { dt_ev: 1.0, dt_pop: 5.0 }
    }
}

pub(crate) fn register(reg: &mut StrategyRegistry) {
    reg.register(POP_BOUND, |ctx| Ok(Box::new(PopBound::new(ctx.pop, ctx.capacity))));
    reg.register(CACHEABILITY, |_| Ok(Box::new(Cacheability::default())));
}

/// Contents ordered by request count in a window: higher count first, then
/// more recent last request, then smaller id.
#[derive(Debug, Clone, Default)]
pub struct PopularityRanking {
    ranks: HashMap<ContentId, usize>,
}

impl PopularityRanking {
    /// `stats` maps id → (count, last request time).
    pub fn from_counts<'a, I>(stats: I) -> Self
    where
        I: IntoIterator<Item = (&'a ContentId, &'a (u64, f64))>,
    {
        let mut entries: Vec<(ContentId, u64, f64)> = stats
            .into_iter()
            .filter(|(_, (count, _))| *count > 0)
            .map(|(&id, &(count, last))| (id, count, last))
            .collect();
        entries.sort_unstable_by(|a, b| {
            b.1.cmp(&a.1)
                .then(b.2.total_cmp(&a.2))
                .then(a.0.cmp(&b.0))
        });
        Self {
            ranks: entries
                .into_iter()
                .enumerate()
                .map(|(i, (id, _, _))| (id, i + 1))
                .collect(),
        }
    }

    /// 1-based rank, `None` if the content was not requested in the window.
    pub fn rank(&self, id: ContentId) -> Option<usize> {
        self.ranks.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Per-request realization of the POP upper bound. At each boundary
/// `t_n = n·Δt_ev` the ranking over `[t_n − Δt_pop, t_n)` is frozen; a
/// request covered by `m` stations during `[t_n, t_n + Δt_ev)` scores a hit
/// iff its content ranks within the top `m·K`.
#[derive(Debug, Clone)]
pub struct PopBound {
    config: PopConfig,
    capacity: usize,
    history: VecDeque<(f64, ContentId)>,
    window_stats: HashMap<ContentId, (u64, f64)>,
    ranking: PopularityRanking,
    next_boundary: f64,
}

impl PopBound {
    pub fn new(config: PopConfig, capacity: usize) -> Self {
        Self {
            config,
            capacity,
            history: VecDeque::new(),
            window_stats: HashMap::new(),
            ranking: PopularityRanking::default(),
            next_boundary: f64::NEG_INFINITY,
        }
    }

    pub fn config(&self) -> PopConfig {
        self.config
    }

    fn refresh(&mut self, boundary: f64) {
        let cutoff = boundary - self.config.dt_pop;
        while let Some(&(t, id)) = self.history.front() {
            if t >= cutoff {
                break;
            }
            self.history.pop_front();
            if let Some(entry) = self.window_stats.get_mut(&id) {
                entry.0 -= 1;
                if entry.0 == 0 {
                    self.window_stats.remove(&id);
                }
            }
        }
        self.ranking = PopularityRanking::from_counts(&self.window_stats);
    }

    fn advance_to(&mut self, time: f64) {
        let dt = self.config.dt_ev;
        if self.next_boundary == f64::NEG_INFINITY {
            // first boundary at or before the first request
            self.next_boundary = (time / dt).floor() * dt;
        }
        while time >= self.next_boundary {
            let b = self.next_boundary;
            self.refresh(b);
            let n = (b / dt).round() + 1.0;
            self.next_boundary = n * dt;
        }
    }
}

impl Strategy for PopBound {
    fn name(&self) -> &str {
        POP_BOUND
    }

    fn serve(&mut self, request: &Request, coverage: &CoverageSet) -> PolicyOutcome {
        self.advance_to(request.time);
        let m = coverage.m();
        let slots = m.saturating_mul(self.capacity);
        let hit = m > 0 && self.ranking.rank(request.content_id).is_some_and(|r| r <= slots);
        self.history.push_back((request.time, request.content_id));
        let entry = self.window_stats.entry(request.content_id).or_insert((0, request.time));
        entry.0 += 1;
        entry.1 = request.time;
        PolicyOutcome::virtual_hit(hit, m)
    }
}

/// Scores a hit for every request whose content appeared earlier in the
/// trace.
#[derive(Debug, Clone, Default)]
pub struct Cacheability {
    seen: HashSet<ContentId>,
}

impl Strategy for Cacheability {
    fn name(&self) -> &str {
        CACHEABILITY
    }

    fn serve(&mut self, request: &Request, coverage: &CoverageSet) -> PolicyOutcome {
        let hit = !self.seen.insert(request.content_id);
        PolicyOutcome::virtual_hit(hit, coverage.m())
    }
}

fn score<S: Strategy + ?Sized>(
    strategy: &mut S,
    trace: &[Request],
    coverage: &[CoverageSet],
    measurement: &Measurement,
) -> HitTally {
    let mut tally = HitTally::default();
    for (r, c) in trace.iter().zip(coverage) {
        let outcome = strategy.serve(r, c);
        tally.record(measurement, r.time, &outcome);
    }
    tally
}

fn coverage_of<F>(trace: &[Request], mut coverage_fn: F) -> Vec<CoverageSet>
where
    F: FnMut(Point) -> CoverageSet,
{
    trace.iter().map(|r| coverage_fn(r.position)).collect()
}

/// Hit probability of the POP upper bound on a stored, time-ordered trace.
pub fn pop_upper_bound<F>(
    trace: &[Request],
    coverage_fn: F,
    pop: PopConfig,
    capacity: usize,
    measurement: &Measurement,
) -> f64
where
    F: FnMut(Point) -> CoverageSet,
{
    let coverage = coverage_of(trace, coverage_fn);
    score(&mut PopBound::new(pop, capacity), trace, &coverage, measurement).hit_prob()
}

/// `(measured − first requests among measured) / measured`.
pub fn cacheability_limit<F>(trace: &[Request], coverage_fn: F, measurement: &Measurement) -> f64
where
    F: FnMut(Point) -> CoverageSet,
{
    let coverage = coverage_of(trace, coverage_fn);
    score(&mut Cacheability::default(), trace, &coverage, measurement).hit_prob()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtPopSearch {
    pub dt_pop: f64,
    pub bound: f64,
    /// `(Δt_pop, bound)` for every candidate.
    pub curve: Vec<(f64, f64)>,
}

/// Index chosen by increasing `Δt_pop` until the bound first decreases.
pub fn stopping_rule_index(values: &[f64]) -> usize {
    values
        .windows(2)
        .position(|w| w[1] < w[0])
        .unwrap_or(values.len().saturating_sub(1))
}

/// Evaluates the bound at each candidate window (ascending) and keeps the
/// one where it first stops increasing.
pub fn find_optimal_dtpop<F>(
    trace: &[Request],
    coverage_fn: F,
    dt_ev: f64,
    capacity: usize,
    candidates: &[f64],
    measurement: &Measurement,
) -> DtPopSearch
where
    F: FnMut(Point) -> CoverageSet,
{
    assert!(!candidates.is_empty(), "at least one candidate window");
    let coverage = coverage_of(trace, coverage_fn);
    let curve: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&dt_pop| {
            let mut s = PopBound::new(PopConfig { dt_ev, dt_pop }, capacity);
            (dt_pop, score(&mut s, trace, &coverage, measurement).hit_prob())
        })
        .collect();
    let values: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let i = stopping_rule_index(&values);
    DtPopSearch {
        dt_pop: curve[i].0,
        bound: curve[i].1,
        curve,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(time: f64, id: ContentId) -> Request {
        Request { time, content_id: id, position: Point::new(0.0, 0.0) }
    }

    fn covered(m: usize) -> impl FnMut(Point) -> CoverageSet {
        move |_| CoverageSet::from_sorted((0..m).collect())
    }

    #[test]
    fn ranking_tie_break() {
        let mut stats = HashMap::new();
        stats.insert(5, (2, 1.0));
        stats.insert(3, (2, 4.0));
        stats.insert(9, (3, 0.5));
        stats.insert(1, (2, 4.0));
        let r = PopularityRanking::from_counts(&stats);
        assert_eq!(r.rank(9), Some(1));
        assert_eq!(r.rank(1), Some(2));
        assert_eq!(r.rank(3), Some(3));
        assert_eq!(r.rank(5), Some(4));
        assert_eq!(r.rank(7), None);
    }

    #[test]
    fn first_request_never_hits() {
        let trace = vec![req(0.5, 1), req(2.5, 2), req(3.5, 3)];
        let b = pop_upper_bound(&trace, covered(2), PopConfig::default(), 10, &Measurement::everything());
        assert_eq!(b, 0.0);
    }

    #[test]
    fn ranking_frozen_within_period() {
        // Content 1 requested on day 0, again on day 1 (hit: ranked at t=1),
        // and twice within day 1 (second of those still uses day-1 ranking).
        let trace = [req(0.2, 1), req(1.1, 1), req(1.2, 2), req(1.3, 2)];
        let mut s = PopBound::new(PopConfig { dt_ev: 1.0, dt_pop: 5.0 }, 1);
        let cov = CoverageSet::from_sorted(vec![0]);
        let hits: Vec<bool> = trace.iter().map(|r| s.serve(r, &cov).hit).collect();
        assert_eq!(hits, vec![false, true, false, false]);
    }

    #[test]
    fn window_forgets_old_requests() {
        let trace = vec![req(0.5, 1), req(10.5, 1)];
        let short = pop_upper_bound(&trace, covered(1), PopConfig { dt_ev: 1.0, dt_pop: 3.0 }, 5, &Measurement::everything());
        let long = pop_upper_bound(&trace, covered(1), PopConfig { dt_ev: 1.0, dt_pop: 20.0 }, 5, &Measurement::everything());
        assert_eq!(short, 0.0);
        assert_eq!(long, 0.5);
    }

    #[test]
    fn zero_capacity_bound_is_zero() {
        let trace: Vec<Request> = (0..50).map(|i| req(i as f64 * 0.3, (i % 3) as u64)).collect();
        let b = pop_upper_bound(&trace, covered(3), PopConfig::default(), 0, &Measurement::everything());
        assert_eq!(b, 0.0);
    }

    #[test]
    fn uncovered_requests_never_hit() {
        let trace = vec![req(0.5, 1), req(1.5, 1)];
        let b = pop_upper_bound(&trace, covered(0), PopConfig::default(), 5, &Measurement::everything());
        assert_eq!(b, 0.0);
    }

    #[test]
    fn cacheability_examples() {
        let once: Vec<Request> = (0..10).map(|i| req(i as f64, i)).collect();
        assert_eq!(cacheability_limit(&once, covered(1), &Measurement::everything()), 0.0);
        let r = 8;
        let repeated: Vec<Request> = (0..r).map(|i| req(i as f64, 42)).collect();
        let l = cacheability_limit(&repeated, covered(1), &Measurement::everything());
        assert!((l - (r as f64 - 1.0) / r as f64).abs() < 1e-15);
    }

    #[test]
    fn stopping_rule() {
        assert_eq!(stopping_rule_index(&[0.1, 0.2, 0.3]), 2);
        assert_eq!(stopping_rule_index(&[0.1, 0.3, 0.2, 0.4]), 1);
        assert_eq!(stopping_rule_index(&[0.5]), 0);
        assert_eq!(stopping_rule_index(&[0.2, 0.2, 0.1]), 1);
    }

    #[test]
    fn optimal_search_single_candidate() {
        let trace = vec![req(0.5, 1), req(1.5, 1), req(2.5, 1)];
        let s = find_optimal_dtpop(&trace, covered(1), 1.0, 1, &[4.0], &Measurement::everything());
        assert_eq!(s.dt_pop, 4.0);
        assert_eq!(s.curve.len(), 1);
        assert!((s.bound - 2.0 / 3.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn bound_monotone_in_k_and_below_cacheability(
            raw in proptest::collection::vec((0.0f64..30.0, 0u64..15, 0usize..3), 1..300),
            dt_pop in 0.5f64..10.0,
        ) {
            let mut trace: Vec<(f64, u64, usize)> = raw;
            trace.sort_by(|a, b| a.0.total_cmp(&b.0));
            let reqs: Vec<Request> = trace.iter().map(|&(t, id, _)| req(t, id)).collect();
            let cov: Vec<CoverageSet> = trace.iter().map(|&(_, _, m)| CoverageSet::from_sorted((0..m).collect())).collect();
            let meas = Measurement { start: 5.0, rule: crate::metrics::MetricRule::CoveredOnly };
            let pop = PopConfig { dt_ev: 1.0, dt_pop };
            let limit = score(&mut Cacheability::default(), &reqs, &cov, &meas).hit_prob();
            let mut prev = 0.0;
            for k in 0..6 {
                let b = score(&mut PopBound::new(pop, k), &reqs, &cov, &meas).hit_prob();
                proptest::prop_assert!(b >= prev);
                proptest::prop_assert!(b <= limit);
                prev = b;
            }
        }
    }
}
