//! Running statistics for Monte Carlo estimation: Welford accumulators,
//! batch means for correlated time series, and uniform-in-time reservoir
//! sampling of snapshots.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Numerically stable running mean/variance.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    /// Order-insensitive merge (up to floating-point reassociation).
    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean += delta * n2 / n;
        self.m2 += other.m2 + delta * delta * n1 * n2 / n;
        self.count += other.count;
    }
}

/// Batch-means estimator: splits a correlated time series into a fixed
/// number of contiguous batches; the standard error of the overall mean is
/// estimated from the spread of batch means.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchMeans {
    batch_count: usize,
    per_batch: u64,
    seen: u64,
    current: Accumulator,
    finished: Vec<f64>,
}

impl BatchMeans {
    /// `expected_samples` fixes the batch length up front; trailing samples
    /// beyond `batch_count * per_batch` keep extending the last batch.
    pub fn new(batch_count: usize, expected_samples: u64) -> Self {
        let per_batch = (expected_samples / batch_count.max(1) as u64).max(1);
        BatchMeans {
            batch_count: batch_count.max(1),
            per_batch,
            seen: 0,
            current: Accumulator::new(),
            finished: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64) {
        self.current.push(x);
        self.seen += 1;
        let is_last = self.finished.len() + 1 >= self.batch_count;
        if !is_last && self.current.count() >= self.per_batch {
            self.finished.push(self.current.mean());
            self.current = Accumulator::new();
        }
    }

    pub fn batch_means(&self) -> Vec<f64> {
        let mut out = self.finished.clone();
        if self.current.count() > 0 {
            out.push(self.current.mean());
        }
        out
    }

    pub fn mean(&self) -> f64 {
        let bm = self.batch_means();
        if bm.is_empty() {
            return 0.0;
        }
        // batches have equal weight except possibly the trailing one; the
        // imbalance is immaterial for the stderr use and keeps this simple
        bm.iter().sum::<f64>() / bm.len() as f64
    }

    pub fn stderr(&self) -> f64 {
        let bm = self.batch_means();
        if bm.len() < 2 {
            return 0.0;
        }
        let mut acc = Accumulator::new();
        for x in &bm {
            acc.push(*x);
        }
        acc.stderr()
    }
}

/// Classic reservoir sampling: every item of the stream ends up in the
/// reservoir with probability `capacity / seen`, uniformly.
#[derive(Clone, Debug)]
pub struct Reservoir<T> {
    capacity: usize,
    seen: u64,
    items: Vec<T>,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize) -> Self {
        Reservoir { capacity, seen: 0, items: Vec::with_capacity(capacity.min(1024)) }
    }

    pub fn offer(&mut self, item: T, rng: &mut impl Rng) {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else if self.capacity > 0 {
            let j = rng.random_range(0..self.seen);
            if (j as usize) < self.capacity {
                let slot = rng.random_range(0..self.capacity);
                self.items[slot] = item;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }

    /// Merges another reservoir drawn from a disjoint stream, preserving
    /// uniformity over the union: each output slot keeps an item from `self`
    /// with probability `seen_self / (seen_self + seen_other)`.
    pub fn merge(&mut self, other: Reservoir<T>, rng: &mut impl Rng)
    where
        T: Clone,
    {
        if other.seen == 0 {
            return;
        }
        if self.seen == 0 {
            *self = other;
            return;
        }
        let total = self.seen + other.seen;
        let mut merged: Vec<T> = Vec::with_capacity(self.capacity);
        let take = self.capacity.min((self.items.len() + other.items.len()).max(1));
        for slot in 0..take {
            let from_self = rng.random_range(0..total) < self.seen;
            let src = if from_self && !self.items.is_empty() {
                &self.items
            } else if !other.items.is_empty() {
                &other.items
            } else {
                &self.items
            };
            if src.is_empty() {
                break;
            }
            let j = rng.random_range(0..src.len());
            let _ = slot;
            merged.push(src[j].clone());
        }
        self.items = merged;
        self.seen = total;
    }
}
