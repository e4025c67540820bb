//! Request handling for single-LRU and the two multi-LRU variants.

use super::lru::LruCache;
use super::PolicyOutcome;
use crate::coverage::CoverageSet;
use crate::traffic::ContentId;

fn miss_into(caches: &mut [LruCache], id: ContentId, targets: &[usize], m: usize) -> PolicyOutcome {
    for &s in targets {
        caches[s].insert(id).expect("content absent on miss");
    }
    PolicyOutcome {
        hit: false,
        served_by: None,
        inserted_into: targets.to_vec(),
        m,
    }
}

/// Only the closest covering station is consulted.
pub fn single_lru(id: ContentId, coverage: &CoverageSet, caches: &mut [LruCache]) -> PolicyOutcome {
    let m = coverage.m();
    let Some(closest) = coverage.closest() else {
        return PolicyOutcome::no_access();
    };
    let cache = &mut caches[closest];
    if cache.contains(id) {
        cache.touch(id).expect("present");
        PolicyOutcome::hit(closest, m)
    } else {
        miss_into(caches, id, &[closest], m)
    }
}

/// All covering caches are searched. A hit refreshes only the closest cache
/// holding the content; a miss inserts only into the closest covering cache.
pub fn multi_lru_one(id: ContentId, coverage: &CoverageSet, caches: &mut [LruCache]) -> PolicyOutcome {
    let m = coverage.m();
    let Some(closest) = coverage.closest() else {
        return PolicyOutcome::no_access();
    };
    match coverage.station_ids.iter().copied().find(|&s| caches[s].contains(id)) {
        Some(server) => {
            caches[server].touch(id).expect("present");
            PolicyOutcome::hit(server, m)
        }
        None => miss_into(caches, id, &[closest], m),
    }
}

/// All covering caches are searched. A hit refreshes every cache holding the
/// content; a miss inserts into every covering cache.
pub fn multi_lru_all(id: ContentId, coverage: &CoverageSet, caches: &mut [LruCache]) -> PolicyOutcome {
    let m = coverage.m();
    if m == 0 {
        return PolicyOutcome::no_access();
    }
    let mut server = None;
    for &s in &coverage.station_ids {
        if caches[s].contains(id) {
            caches[s].touch(id).expect("present");
            server.get_or_insert(s);
        }
    }
    match server {
        Some(s) => PolicyOutcome::hit(s, m),
        None => miss_into(caches, id, &coverage.station_ids, m),
    }
}
