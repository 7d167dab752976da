use serde::{Deserialize, Serialize};

use crate::data::FeatureSchedule;

use super::HarnessError;

/// Chronological split of a stream into equal batches, each with an ordered
/// train prefix and test suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub n_batches: usize,
    pub train_fraction: f64,
    pub schedule: FeatureSchedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchBounds {
    pub index: usize,
    pub start: usize,
    pub train_end: usize,
    pub end: usize,
}

impl BatchBounds {
    pub fn train(&self) -> std::ops::Range<usize> {
        self.start..self.train_end
    }

    pub fn test(&self) -> std::ops::Range<usize> {
        self.train_end..self.end
    }
}

impl BatchPlan {
    pub fn new(n_batches: usize, schedule: FeatureSchedule) -> Self {
        Self {
            n_batches,
            train_fraction: 0.8,
            schedule,
        }
    }

    /// Batch boundaries over a stream of `n` instances. Batches hold
    /// `n / n_batches` instances, the last one also takes the remainder; the
    /// train part is the first `floor(len · train_fraction)` of each.
    pub fn bounds(&self, n: usize) -> Result<Vec<BatchBounds>, HarnessError> {
        if self.n_batches == 0 {
            return Err(HarnessError::Config("n_batches must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(HarnessError::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        let size = n / self.n_batches;
        let mut out = Vec::with_capacity(self.n_batches);
        for index in 0..self.n_batches {
            let start = index * size;
            let end = if index + 1 == self.n_batches { n } else { start + size };
            let train_end = start + ((end - start) as f64 * self.train_fraction).floor() as usize;
            if train_end == start || train_end == end {
                return Err(HarnessError::Config(format!(
                    "{n} instances are too few for {} batches with non-empty train and test splits",
                    self.n_batches
                )));
            }
            out.push(BatchBounds {
                index,
                start,
                train_end,
                end,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(n: usize) -> BatchPlan {
        BatchPlan::new(n, FeatureSchedule::default())
    }

    #[test]
    fn equal_batches_with_remainder_in_last() {
        let b = plan(3).bounds(103).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!((b[0].start, b[0].train_end, b[0].end), (0, 27, 34));
        assert_eq!((b[1].start, b[1].end), (34, 68));
        assert_eq!((b[2].start, b[2].train_end, b[2].end), (68, 96, 103));
    }

    #[test]
    fn batches_tile_the_stream() {
        let b = plan(7).bounds(1000).unwrap();
        assert_eq!(b[0].start, 0);
        assert_eq!(b.last().unwrap().end, 1000);
        assert!(b.windows(2).all(|w| w[0].end == w[1].start));
    }

    #[test]
    fn too_few_instances() {
        assert!(plan(10).bounds(15).is_err());
        assert!(plan(0).bounds(15).is_err());
    }
}
