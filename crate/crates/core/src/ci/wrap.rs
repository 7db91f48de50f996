use std::collections::HashMap;
use std::sync::Mutex;

use super::{CiRecord, CiTest};
use crate::graph::TimedNode;
use crate::Result;

/// Counts every invocation of the inner test by conditioning-set size.
#[derive(Debug)]
pub struct CountingTest<T> {
    inner: T,
    hist: Mutex<Vec<u64>>,
}

impl<T: CiTest> CountingTest<T> {
    pub fn new(inner: T) -> Self {
        CountingTest { inner, hist: Mutex::new(Vec::new()) }
    }

    /// `histogram()[k]` is the number of calls with `|z| = k`.
    pub fn histogram(&self) -> Vec<u64> {
        self.hist.lock().expect("histogram lock").clone()
    }

    pub fn total(&self) -> u64 {
        self.hist.lock().expect("histogram lock").iter().sum()
    }

    pub fn into_inner(self) -> T {
        self.inner
    }
}

impl<T: CiTest> CiTest for CountingTest<T> {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
        {
            let mut h = self.hist.lock().expect("histogram lock");
            if h.len() <= z.len() {
                h.resize(z.len() + 1, 0);
            }
            h[z.len()] += 1;
        }
        self.inner.test(x, y, z)
    }
}

type CacheKey = (TimedNode, TimedNode, Vec<TimedNode>);

/// Memoizes results per unordered pair and conditioning set.
#[derive(Debug)]
pub struct CachedTest<T> {
    inner: T,
    cache: Mutex<HashMap<CacheKey, CiRecord>>,
}

impl<T: CiTest> CachedTest<T> {
    pub fn new(inner: T) -> Self {
        CachedTest { inner, cache: Mutex::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T: CiTest> CiTest for CachedTest<T> {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
        let mut zs = z.to_vec();
        zs.sort_unstable();
        let key = (x.min(y), x.max(y), zs);
        if let Some(r) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(CiRecord { x, y, z: z.to_vec(), ..r.clone() });
        }
        let r = self.inner.test(x, y, z)?;
        self.cache.lock().expect("cache lock").insert(key, r.clone());
        Ok(r)
    }
}
