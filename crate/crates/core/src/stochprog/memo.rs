//! LRU memo table for sampled subproblem values.
//!
//! Within one fixed sample, `R_N` of a probe outcome depends only on which
//! sample indices share that outcome, so the index set is the key. The key is
//! exact: a single word for samples of at most 64 points, the full bitset
//! otherwise.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering::Relaxed};
use std::sync::{Arc, Mutex};

use lru::LruCache;

use super::TwoStageResult;
use crate::error::Result;

pub const DEFAULT_MEMO_CAPACITY: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MemoKey {
    Mask(u64),
    Words(Box<[u64]>),
}

impl MemoKey {
    /// Canonical key of the subset `indices` of `0..n`.
    pub fn from_indices(indices: &[usize], n: usize) -> Self {
        if n <= 64 {
            let mut m = 0u64;
            for &i in indices {
                debug_assert!(i < n);
                m |= 1 << i;
            }
            MemoKey::Mask(m)
        } else {
            let mut words = vec![0u64; n.div_ceil(64)];
            for &i in indices {
                debug_assert!(i < n);
                words[i / 64] |= 1 << (i % 64);
            }
            MemoKey::Words(words.into_boxed_slice())
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MemoStats {
    pub hits: u64,
    pub misses: u64,
}

impl MemoStats {
    pub fn hit_rate(&self) -> f64 {
        let total = self.hits + self.misses;
        if total == 0 {
            0.0
        } else {
            self.hits as f64 / total as f64
        }
    }
}

/// Thread-safe memo table. Capacity 0 disables storage; every lookup then
/// solves.
pub struct Memo {
    cache: Option<Mutex<LruCache<MemoKey, Arc<TwoStageResult>>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Memo {
    pub fn new(capacity: usize) -> Self {
        Memo {
            cache: NonZeroUsize::new(capacity).map(|c| Mutex::new(LruCache::new(c))),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn disabled() -> Self {
        Self::new(0)
    }

    /// Returns the cached value for `key`, or runs `solve` and caches it.
    /// Concurrent misses on the same key may both solve; the results agree.
    pub fn lookup_or_solve<F>(&self, key: MemoKey, solve: F) -> Result<(Arc<TwoStageResult>, bool)>
    where
        F: FnOnce() -> Result<TwoStageResult>,
    {
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.lock().unwrap().get(&key) {
                self.hits.fetch_add(1, Relaxed);
                return Ok((Arc::clone(v), true));
            }
        }
        self.misses.fetch_add(1, Relaxed);
        let value = Arc::new(solve()?);
        if let Some(cache) = &self.cache {
            cache.lock().unwrap().put(key, Arc::clone(&value));
        }
        Ok((value, false))
    }

    pub fn stats(&self) -> MemoStats {
        MemoStats { hits: self.hits.load(Relaxed), misses: self.misses.load(Relaxed) }
    }

    pub fn len(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.lock().unwrap().len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recourse::FirstStageSolution;
    use crate::stochprog::BackendKind;

    fn result(v: f64) -> TwoStageResult {
        TwoStageResult {
            value: v,
            solution: FirstStageSolution { config: vec![], assign: vec![] },
            scenario_count: 1,
            backend: BackendKind::Exhaustive,
        }
    }

    #[test]
    fn keys_are_canonical() {
        assert_eq!(MemoKey::from_indices(&[3, 1], 10), MemoKey::from_indices(&[1, 3], 10));
        assert_ne!(MemoKey::from_indices(&[1], 10), MemoKey::from_indices(&[2], 10));
        let a = MemoKey::from_indices(&[0, 70, 127], 200);
        let b = MemoKey::from_indices(&[127, 0, 70], 200);
        assert_eq!(a, b);
        assert_ne!(a, MemoKey::from_indices(&[0, 70], 200));
    }

    #[test]
    fn second_lookup_hits() {
        let memo = Memo::new(4);
        let k = MemoKey::from_indices(&[1, 2], 8);
        let (a, hit_a) = memo.lookup_or_solve(k.clone(), || Ok(result(1.5))).unwrap();
        let (b, hit_b) = memo.lookup_or_solve(k, || panic!("must not solve on a hit")).unwrap();
        assert!(!hit_a && hit_b);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(memo.stats(), MemoStats { hits: 1, misses: 1 });
    }

    #[test]
    fn lru_eviction() {
        let memo = Memo::new(1);
        let keys: Vec<MemoKey> = (0..3).map(|i| MemoKey::from_indices(&[i], 8)).collect();
        for (i, k) in keys.iter().enumerate() {
            memo.lookup_or_solve(k.clone(), || Ok(result(i as f64))).unwrap();
        }
        let (_, hit) = memo.lookup_or_solve(keys[0].clone(), || Ok(result(0.0))).unwrap();
        assert!(!hit);
        assert_eq!(memo.len(), 1);
    }

    #[test]
    fn disabled_never_hits() {
        let memo = Memo::disabled();
        let k = MemoKey::from_indices(&[1], 8);
        memo.lookup_or_solve(k.clone(), || Ok(result(1.0))).unwrap();
        let (_, hit) = memo.lookup_or_solve(k, || Ok(result(1.0))).unwrap();
        assert!(!hit);
        assert_eq!(memo.stats().misses, 2);
    }
}
