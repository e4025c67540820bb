//! Caching strategies behind one interface, selectable by name.
//!
//! A [`Strategy`] observes every request of a trace in time order together
//! with the stations covering it and reports whether the request was a hit.
//! The three LRU policies keep one [`LruCache`] per station; the baselines in
//! [`crate::baselines`] implement the same trait so the engine drives every
//! curve of a comparison from a single pass over the trace.

mod lru;
mod spatial;

use std::collections::BTreeMap;

pub use lru::{lru_insert, lru_lookup, lru_touch, LruCache, LruMisuse};
pub use spatial::{multi_lru_all, multi_lru_one, single_lru};

use crate::baselines::PopConfig;
use crate::coverage::{CoverageSet, StationId};
use crate::error::{Error, Result};
use crate::traffic::Request;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyOutcome {
    pub hit: bool,
    /// Station that served a hit. `None` for misses and for baselines that
    /// do not model placement.
    pub served_by: Option<StationId>,
    pub inserted_into: Vec<StationId>,
    /// Coverage cardinality at the request.
    pub m: usize,
}

impl PolicyOutcome {
    pub fn no_access() -> Self {
        Self::miss(0)
    }

    pub fn hit(server: StationId, m: usize) -> Self {
        Self {
            hit: true,
            served_by: Some(server),
            inserted_into: Vec::new(),
            m,
        }
    }

    pub fn miss(m: usize) -> Self {
        Self {
            hit: false,
            served_by: None,
            inserted_into: Vec::new(),
            m,
        }
    }

    pub fn virtual_hit(hit: bool, m: usize) -> Self {
        Self {
            hit,
            served_by: None,
            inserted_into: Vec::new(),
            m,
        }
    }
}

pub trait Strategy: Send {
    fn name(&self) -> &str;

    /// Handles one request. Requests arrive in nondecreasing time order.
    fn serve(&mut self, request: &Request, coverage: &CoverageSet) -> PolicyOutcome;
}

/// Everything a factory needs to build a strategy for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyContext {
    pub stations: usize,
    pub capacity: usize,
    pub pop: PopConfig,
}

pub type StrategyFactory = Box<dyn Fn(&StrategyContext) -> Result<Box<dyn Strategy>> + Send + Sync>;

pub struct StrategyRegistry {
    factories: BTreeMap<String, StrategyFactory>,
}

impl std::fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// The three LRU policies and the two baselines.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register(SINGLE_LRU, |ctx| Ok(Box::new(LruPolicy::new(LruVariant::Single, ctx))));
        reg.register(MULTI_LRU_ONE, |ctx| Ok(Box::new(LruPolicy::new(LruVariant::One, ctx))));
        reg.register(MULTI_LRU_ALL, |ctx| Ok(Box::new(LruPolicy::new(LruVariant::All, ctx))));
        crate::baselines::register(&mut reg);
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&StrategyContext) -> Result<Box<dyn Strategy>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, name: &str, ctx: &StrategyContext) -> Result<Box<dyn Strategy>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))?;
        factory(ctx)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }
}

pub const SINGLE_LRU: &str = "single-lru";
pub const MULTI_LRU_ONE: &str = "multi-lru-one";
pub const MULTI_LRU_ALL: &str = "multi-lru-all";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LruVariant {
    Single,
    One,
    All,
}

impl LruVariant {
    pub fn name(self) -> &'static str {
        match self {
            LruVariant::Single => SINGLE_LRU,
            LruVariant::One => MULTI_LRU_ONE,
            LruVariant::All => MULTI_LRU_ALL,
        }
    }
}

/// One LRU inventory per station plus the rule for using them.
#[derive(Debug, Clone)]
pub struct LruPolicy {
    variant: LruVariant,
    caches: Vec<LruCache>,
}

impl LruPolicy {
    pub fn new(variant: LruVariant, ctx: &StrategyContext) -> Self {
        Self {
            variant,
            caches: (0..ctx.stations).map(|_| LruCache::new(ctx.capacity)).collect(),
        }
    }

    pub fn caches(&self) -> &[LruCache] {
        &self.caches
    }
}

impl Strategy for LruPolicy {
    fn name(&self) -> &str {
        self.variant.name()
    }

    fn serve(&mut self, request: &Request, coverage: &CoverageSet) -> PolicyOutcome {
        let id = request.content_id;
        match self.variant {
            LruVariant::Single => single_lru(id, coverage, &mut self.caches),
            LruVariant::One => multi_lru_one(id, coverage, &mut self.caches),
            LruVariant::All => multi_lru_all(id, coverage, &mut self.caches),
        }
    }
}
