//! Adaptive-windowing change detector.
//!
//! Keeps a variable-length window of recent observations compressed into an
//! exponential histogram of buckets. Every `clock` insertions it scans the
//! bucket boundaries for a split into an older and a newer sub-window whose
//! means differ by more than a Hoeffding-style bound; the older part is then
//! dropped and a change is signalled.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Bucket {
    count: f64,
    total: f64,
    /// Sum of squared deviations from the bucket mean.
    m2: f64,
}

impl Bucket {
    fn merge(a: Bucket, b: Bucket) -> Bucket {
        let count = a.count + b.count;
        let delta = a.total / a.count - b.total / b.count;
        Bucket {
            count,
            total: a.total + b.total,
            m2: a.m2 + b.m2 + a.count * b.count * delta * delta / count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adwin {
    delta: f64,
    clock: u32,
    max_buckets: usize,
    min_window: f64,
    grace_period: f64,
    /// Level `i` holds buckets of `2^i` observations, oldest at the front.
    levels: Vec<VecDeque<Bucket>>,
    width: f64,
    total: f64,
    m2: f64,
    ticks: u32,
    drift_detected: bool,
}

impl Adwin {
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            clock: 32,
            max_buckets: 5,
            min_window: 5.0,
            grace_period: 10.0,
            levels: vec![VecDeque::new()],
            width: 0.0,
            total: 0.0,
            m2: 0.0,
            ticks: 0,
            drift_detected: false,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn mean(&self) -> f64 {
        if self.width > 0.0 {
            self.total / self.width
        } else {
            0.0
        }
    }

    pub fn variance(&self) -> f64 {
        if self.width > 0.0 {
            self.m2 / self.width
        } else {
            0.0
        }
    }

    /// Whether the most recent `update` detected a change.
    pub fn drift_detected(&self) -> bool {
        self.drift_detected
    }

    /// Fresh detector with the same parameters.
    pub fn reset(&self) -> Self {
        Self::new(self.delta)
    }

    pub fn update(&mut self, value: f64) -> bool {
        self.insert(value);
        self.ticks += 1;
        self.drift_detected = false;
        if self.ticks % self.clock == 0 && self.width > self.grace_period {
            self.drift_detected = self.shrink_window();
        }
        self.drift_detected
    }

    fn insert(&mut self, value: f64) {
        if self.width > 0.0 {
            let mean = self.total / self.width;
            self.m2 += self.width * (value - mean) * (value - mean) / (self.width + 1.0);
        }
        self.width += 1.0;
        self.total += value;
        self.levels[0].push_back(Bucket {
            count: 1.0,
            total: value,
            m2: 0.0,
        });
        self.compress();
    }

    fn compress(&mut self) {
        let mut level = 0;
        while level < self.levels.len() {
            if self.levels[level].len() <= self.max_buckets {
                break;
            }
            let a = self.levels[level].pop_front().expect("bucket");
            let b = self.levels[level].pop_front().expect("bucket");
            if level + 1 == self.levels.len() {
                self.levels.push(VecDeque::new());
            }
            self.levels[level + 1].push_back(Bucket::merge(a, b));
            level += 1;
        }
    }

    fn drop_oldest(&mut self) {
        let Some(level) = self.levels.iter().rposition(|l| !l.is_empty()) else {
            return;
        };
        let b = self.levels[level].pop_front().expect("non-empty level");
        let rest = self.width - b.count;
        if rest > 0.0 {
            let rest_mean = (self.total - b.total) / rest;
            let delta = b.total / b.count - rest_mean;
            self.m2 -= b.m2 + b.count * rest * delta * delta / self.width;
            self.m2 = self.m2.max(0.0);
        } else {
            self.m2 = 0.0;
        }
        self.width = rest;
        self.total -= b.total;
        while self.levels.len() > 1 && self.levels.last().is_some_and(|l| l.is_empty()) {
            self.levels.pop();
        }
    }

    fn shrink_window(&mut self) -> bool {
        let mut changed = false;
        'restart: loop {
            let mut n0 = 0.0;
            let mut t0 = 0.0;
            // oldest buckets live at the highest level, front first
            for level in (0..self.levels.len()).rev() {
                for b in self.levels[level].iter() {
                    n0 += b.count;
                    t0 += b.total;
                    let n1 = self.width - n0;
                    if n1 < self.min_window {
                        break 'restart;
                    }
                    if n0 < self.min_window {
                        continue;
                    }
                    let diff = t0 / n0 - (self.total - t0) / n1;
                    if self.cut_exceeds_bound(n0, n1, diff) {
                        self.drop_oldest();
                        changed = true;
                        continue 'restart;
                    }
                }
            }
            break;
        }
        changed
    }

    fn cut_exceeds_bound(&self, n0: f64, n1: f64, mean_diff: f64) -> bool {
        let log_term = (2.0 * self.width.ln() / self.delta).ln();
        let m_recip = 1.0 / (n0 - self.min_window + 1.0) + 1.0 / (n1 - self.min_window + 1.0);
        let eps = (2.0 * m_recip * self.variance() * log_term).sqrt() + 2.0 / 3.0 * log_term * m_recip;
        mean_diff.abs() > eps
    }
}
