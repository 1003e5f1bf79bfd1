//! Half-open intervals and finite unions of them.

use serde::{Deserialize, Serialize};

use crate::time::Time;

/// `[start, end)`. Empty when `end <= start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: Time,
    pub end: Time,
}

impl Interval {
    pub fn new(start: Time, end: Time) -> Self {
        Interval { start, end }
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: &Time) -> bool {
        self.start <= *t && *t < self.end
    }

    pub fn len(&self) -> Time {
        if self.is_empty() {
            Time::zero()
        } else {
            &self.end - &self.start
        }
    }

    /// `self ⊆ outer`. Empty intervals are contained in anything.
    pub fn within(&self, outer: &Interval) -> bool {
        self.is_empty() || (outer.start <= self.start && self.end <= outer.end)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        !self.is_empty() && !other.is_empty() && self.start < other.end && other.start < self.end
    }
}

/// Sorted, pairwise disjoint, non-empty, non-adjacent intervals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new() -> Self {
        IntervalSet::default()
    }

    /// Normalizes arbitrary intervals: drops empties, sorts, merges overlaps
    /// and touching neighbours.
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut parts: Vec<Interval> = intervals.into_iter().filter(|i| !i.is_empty()).collect();
        parts.sort_by(|a, b| a.start.cmp(&b.start).then(a.end.cmp(&b.end)));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for part in parts {
            match merged.last_mut() {
                Some(last) if part.start <= last.end => {
                    if part.end > last.end {
                        last.end = part.end;
                    }
                }
                _ => merged.push(part),
            }
        }
        IntervalSet { parts: merged }
    }

    pub fn single(interval: Interval) -> Self {
        IntervalSet::from_intervals([interval])
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, t: &Time) -> bool {
        self.containing(t).is_some()
    }

    /// Index of the maximal interval containing `t`.
    pub fn containing(&self, t: &Time) -> Option<usize> {
        let idx = self.parts.partition_point(|p| p.end <= *t);
        self.parts
            .get(idx)
            .filter(|p| p.contains(t))
            .map(|_| idx)
    }

    pub fn total_len(&self) -> Time {
        self.parts.iter().map(Interval::len).sum()
    }

    /// True if some part reaches into `[t, ∞)`.
    pub fn reaches(&self, t: &Time) -> bool {
        self.parts.last().is_some_and(|p| p.end > *t)
    }

    pub fn first_start(&self) -> Option<&Time> {
        self.parts.first().map(|p| &p.start)
    }

    pub fn last_end(&self) -> Option<&Time> {
        self.parts.last().map(|p| &p.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(Time::from_int(a), Time::from_int(b))
    }

    #[test]
    fn normalization_merges_and_drops() {
        let set = IntervalSet::from_intervals([iv(5, 7), iv(1, 2), iv(2, 3), iv(4, 4), iv(6, 9)]);
        assert_eq!(set.parts(), &[iv(1, 3), iv(5, 9)]);
        assert_eq!(set.total_len(), Time::from_int(6));
    }

    #[test]
    fn containment_is_half_open() {
        let set = IntervalSet::from_intervals([iv(1, 3), iv(5, 9)]);
        assert_eq!(set.containing(&Time::from_int(1)), Some(0));
        assert_eq!(set.containing(&Time::from_int(3)), None);
        assert_eq!(set.containing(&Time::from_int(8)), Some(1));
        assert_eq!(set.containing(&Time::from_int(9)), None);
        assert!(set.reaches(&Time::from_int(8)));
        assert!(!set.reaches(&Time::from_int(9)));
    }

    #[test]
    fn empty_interval_convention() {
        assert!(iv(3, 3).is_empty());
        assert!(iv(4, 3).is_empty());
        assert_eq!(iv(4, 3).len(), Time::zero());
        assert!(iv(4, 3).within(&iv(0, 1)));
    }
}
