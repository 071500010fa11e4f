//! Closed time intervals and sorted disjoint interval sets.

use serde::{Deserialize, Serialize};

use crate::scalar::{real, Real};

/// Gap below which adjacent intervals are merged, in seconds.
pub const MERGE_TOL: f64 = 1e-9;

/// A closed interval `[lo, hi]` of times in seconds. `lo <= hi`; a degenerate
/// interval (`lo == hi`) is a single instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval<F> {
    pub lo: F,
    pub hi: F,
}

impl<F: Real> Interval<F> {
    pub fn new(lo: F, hi: F) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order");
        Interval { lo, hi }
    }

    pub fn length(&self) -> F {
        self.hi - self.lo
    }

    pub fn contains(&self, t: F) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn intersect(&self, other: &Interval<F>) -> Option<Interval<F>> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval::new(lo, hi))
        } else {
            None
        }
    }
}

/// An ordered list of disjoint closed intervals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet<F> {
    intervals: Vec<Interval<F>>,
}

impl<F: Real> IntervalSet<F> {
    pub fn empty() -> Self {
        IntervalSet {
            intervals: Vec::new(),
        }
    }

    pub fn single(lo: F, hi: F) -> Self {
        IntervalSet {
            intervals: vec![Interval::new(lo, hi)],
        }
    }

    /// Sorts, then merges any pieces that overlap or sit within `MERGE_TOL`.
    pub fn from_pieces(mut pieces: Vec<Interval<F>>) -> Self {
        pieces.retain(|iv| iv.lo <= iv.hi);
        pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let tol = real::<F>(MERGE_TOL);
        let mut merged: Vec<Interval<F>> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi + tol => {
                    last.hi = last.hi.max(iv.hi);
                }
                _ => merged.push(iv),
            }
        }
        IntervalSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval<F>] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, t: F) -> bool {
        self.intervals.iter().any(|iv| iv.contains(t))
    }

    pub fn total_length(&self) -> F {
        self.intervals
            .iter()
            .fold(F::zero(), |acc, iv| acc + iv.length())
    }

    pub fn min(&self) -> Option<F> {
        self.intervals.first().map(|iv| iv.lo)
    }

    pub fn max(&self) -> Option<F> {
        self.intervals.last().map(|iv| iv.hi)
    }

    /// The set `{-t : t in self}`; used by time-reversed planning.
    pub fn reflect(&self) -> IntervalSet<F> {
        let intervals = self
            .intervals
            .iter()
            .rev()
            .map(|iv| Interval::new(-iv.hi, -iv.lo))
            .collect();
        IntervalSet { intervals }
    }

    pub fn intersect_interval(&self, window: Interval<F>) -> IntervalSet<F> {
        let intervals = self
            .intervals
            .iter()
            .filter_map(|iv| iv.intersect(&window))
            .collect();
        IntervalSet { intervals }
    }
}
