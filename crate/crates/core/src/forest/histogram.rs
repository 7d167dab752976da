use serde::{Deserialize, Serialize};

use super::instance::N_CLASSES;

pub const N_BINS: usize = 32;

pub type ClassCounts = [f64; N_CLASSES];

/// Per-class equal-width histogram of one numeric feature at one leaf.
///
/// Until two distinct values have been seen the observer only remembers the
/// single value, so a constant feature never yields a split candidate. Once
/// the range is known the bins cover `[lo, lo + N_BINS * width)`; a value
/// outside that range doubles the width (merging neighbouring bins) until it
/// fits, which keeps memory fixed on unbounded streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NumericObserver {
    Constant {
        value: f64,
        counts: ClassCounts,
    },
    Binned {
        lo: f64,
        width: f64,
        bins: Vec<ClassCounts>,
    },
}

/// A candidate binary split `x < threshold` on one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateSplit {
    pub threshold: f64,
    pub left: ClassCounts,
    pub right: ClassCounts,
}

impl NumericObserver {
    pub fn new(value: f64, label: usize, weight: f64) -> Self {
        let mut counts = [0.0; N_CLASSES];
        counts[label] = weight;
        NumericObserver::Constant { value, counts }
    }

    pub fn observe(&mut self, value: f64, label: usize, weight: f64) {
        match self {
            NumericObserver::Constant {
                value: v0,
                counts,
            } => {
                if value == *v0 {
                    counts[label] += weight;
                    return;
                }
                let lo = v0.min(value);
                let width = (v0.max(value) - lo) / (N_BINS - 1) as f64;
                if !(width > 0.0 && width.is_finite()) {
                    // distinct values too close to separate; treat as equal
                    counts[label] += weight;
                    return;
                }
                let mut bins = vec![[0.0; N_CLASSES]; N_BINS];
                bins[bin_of(lo, width, *v0)] = *counts;
                *self = NumericObserver::Binned { lo, width, bins };
                self.observe(value, label, weight);
            }
            NumericObserver::Binned { lo, width, bins } => {
                while value >= *lo + N_BINS as f64 * *width {
                    let merged = merge_pairs(bins);
                    bins[..N_BINS / 2].copy_from_slice(&merged);
                    bins[N_BINS / 2..].fill([0.0; N_CLASSES]);
                    *width *= 2.0;
                }
                while value < *lo {
                    let merged = merge_pairs(bins);
                    bins[..N_BINS / 2].fill([0.0; N_CLASSES]);
                    bins[N_BINS / 2..].copy_from_slice(&merged);
                    *lo -= N_BINS as f64 * *width;
                    *width *= 2.0;
                }
                bins[bin_of(*lo, *width, value)][label] += weight;
            }
        }
    }

    pub fn totals(&self) -> ClassCounts {
        match self {
            NumericObserver::Constant { counts, .. } => *counts,
            NumericObserver::Binned { bins, .. } => bins.iter().fold([0.0; N_CLASSES], |a, b| add(a, *b)),
        }
    }

    /// True once the observer can propose at least one threshold.
    pub fn has_candidates(&self) -> bool {
        matches!(self, NumericObserver::Binned { .. })
    }

    /// Every bin boundary with weight on both sides.
    pub fn candidates(&self) -> Vec<CandidateSplit> {
        let NumericObserver::Binned { lo, width, bins } = self else {
            return Vec::new();
        };
        let total = bins.iter().fold([0.0; N_CLASSES], |a, b| add(a, *b));
        let mut left = [0.0; N_CLASSES];
        let mut out = Vec::new();
        for (i, prev) in (1..N_BINS).zip(bins.iter()) {
            left = add(left, *prev);
            let right = sub(total, left);
            if sum(&left) > 0.0 && sum(&right) > 0.0 {
                out.push(CandidateSplit {
                    threshold: lo + i as f64 * width,
                    left,
                    right,
                });
            }
        }
        out
    }
}

fn bin_of(lo: f64, width: f64, value: f64) -> usize {
    let b = ((value - lo) / width).floor();
    if b <= 0.0 {
        0
    } else {
        (b as usize).min(N_BINS - 1)
    }
}

fn merge_pairs(bins: &[ClassCounts]) -> Vec<ClassCounts> {
    bins.chunks(2).map(|c| add(c[0], c[1])).collect()
}

pub fn add(a: ClassCounts, b: ClassCounts) -> ClassCounts {
    let mut out = a;
    for (o, v) in out.iter_mut().zip(b) {
        *o += v;
    }
    out
}

pub fn sub(a: ClassCounts, b: ClassCounts) -> ClassCounts {
    let mut out = a;
    for (o, v) in out.iter_mut().zip(b) {
        *o = (*o - v).max(0.0);
    }
    out
}

pub fn sum(c: &ClassCounts) -> f64 {
    c.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_feature_has_no_candidates() {
        let mut o = NumericObserver::new(3.0, 0, 1.0);
        for i in 0..100 {
            o.observe(3.0, i % 2, 1.0);
        }
        assert!(!o.has_candidates());
        assert!(o.candidates().is_empty());
        assert_eq!(o.totals(), [51.0, 50.0]);
    }

    #[test]
    fn separable_values_produce_pure_split() {
        let mut o = NumericObserver::new(0.0, 0, 1.0);
        for i in 0..50 {
            o.observe(i as f64 / 100.0, 0, 1.0);
            o.observe(1.0 + i as f64 / 100.0, 1, 1.0);
        }
        let pure = o
            .candidates()
            .into_iter()
            .find(|c| c.left[1] == 0.0 && c.right[0] == 0.0)
            .expect("a pure threshold exists");
        assert!(pure.threshold > 0.49 && pure.threshold <= 1.0);
    }

    #[test]
    fn range_expansion_preserves_mass() {
        let mut o = NumericObserver::new(0.0, 0, 1.0);
        o.observe(1.0, 1, 2.0);
        o.observe(1000.0, 0, 1.0);
        o.observe(-500.0, 1, 0.5);
        o.observe(0.5, 0, 1.0);
        assert_eq!(o.totals(), [3.0, 2.5]);
        if let NumericObserver::Binned { lo, width, .. } = &o {
            assert!(*lo <= -500.0);
            assert!(lo + N_BINS as f64 * width > 1000.0);
        } else {
            panic!("expected binned observer");
        }
        for c in o.candidates() {
            assert_eq!(add(c.left, c.right), [3.0, 2.5]);
        }
    }
}
