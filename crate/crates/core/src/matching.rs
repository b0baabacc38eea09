//! Perfect matching of points to open intervals.
//!
//! Sweeping the points in ascending order and giving each one the open
//! interval with the smallest upper bound among those that have started is
//! exact: any matching can be exchanged into the greedy one without breaking
//! feasibility, so the greedy fails only when Hall's condition does.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Upper(f64);

impl Eq for Upper {}

impl PartialOrd for Upper {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Upper {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Reusable matcher for one fixed set of intervals.
#[derive(Debug, Clone)]
pub struct IntervalMatcher {
    /// sorted by lower bound
    intervals: Vec<(f64, f64)>,
    heap: BinaryHeap<Reverse<Upper>>,
}

impl IntervalMatcher {
    pub fn new(bounds: &[(f64, f64)]) -> Self {
        let mut intervals = bounds.to_vec();
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        IntervalMatcher {
            heap: BinaryHeap::with_capacity(intervals.len()),
            intervals,
        }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `values` must be sorted ascending and as many as the intervals.
    pub fn matches_sorted(&mut self, values: &[f64]) -> bool {
        debug_assert_eq!(values.len(), self.intervals.len());
        self.heap.clear();
        let mut next = 0;
        for &v in values {
            while next < self.intervals.len() && self.intervals[next].0 < v {
                self.heap.push(Reverse(Upper(self.intervals[next].1)));
                next += 1;
            }
            match self.heap.pop() {
                // The tightest open interval must still be open at v; if it
                // is not, it can never be filled.
                Some(Reverse(Upper(upper))) if v < upper => {}
                _ => return false,
            }
        }
        true
    }
}

/// Whether each value can be given its own interval `(lower, upper)`
/// containing it.
pub fn feasible_assignment_exists(values: &[f64], bounds: &[(f64, f64)]) -> Result<bool> {
    if values.len() != bounds.len() {
        return Err(Error::SizeMismatch {
            values: values.len(),
            bounds: bounds.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(IntervalMatcher::new(bounds).matches_sorted(&sorted))
}
