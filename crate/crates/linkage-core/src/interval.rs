//! Finite unions of disjoint closed intervals of nonnegative reals.
//!
//! These are the value sets of the staged extension problem: every feasible
//! set computed anywhere in this crate is an [`IntervalSet`].

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A closed interval `[lo, hi]` with `0 <= lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo.is_finite() && hi.is_finite() && lo <= hi, "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| Interval::new(lo, hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A normalized union of closed intervals: sorted ascending and strictly
/// disjoint (`hi_i < lo_{i+1}`). Touching or overlapping inputs are merged on
/// construction. The empty set is representable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    pub fn single(iv: Interval) -> Self {
        IntervalSet { intervals: vec![iv] }
    }

    /// Build from arbitrary intervals, merging overlaps and shared endpoints.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(ivs: I) -> Self {
        let mut v: Vec<Interval> = ivs.into_iter().collect();
        v.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Smallest single interval covering the set, if nonempty.
    pub fn hull(&self) -> Option<Interval> {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(a), Some(b)) => Some(Interval::new(a.lo, b.hi)),
            _ => None,
        }
    }

    /// Total measure of the set.
    pub fn total_width(&self) -> f64 {
        self.intervals.iter().map(Interval::width).sum()
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = self.intervals[i];
            let b = other.intervals[j];
            if let Some(iv) = a.intersect(&b) {
                out.push(iv);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.intervals.iter().chain(&other.intervals).copied())
    }

    /// Merge intervals whose gap is at most `gap` (grid quantization repair).
    pub fn merge_within(&self, gap: f64) -> IntervalSet {
        let mut out: Vec<Interval> = Vec::with_capacity(self.intervals.len());
        for iv in &self.intervals {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi + gap => last.hi = last.hi.max(iv.hi),
                _ => out.push(*iv),
            }
        }
        IntervalSet { intervals: out }
    }

    /// Distance from `x` to the set; 0 when contained, infinity when empty.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|iv| {
                if iv.contains(x) {
                    0.0
                } else if x < iv.lo {
                    iv.lo - x
                } else {
                    x - iv.hi
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV rows `lo,hi`, one interval per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for iv in &self.intervals {
            s.push_str(&format!("{},{}\n", iv.lo, iv.hi));
        }
        s
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.intervals.iter().map(|iv| iv.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

// Wire format: {"intervals": [[lo, hi], ...]}
impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            intervals: Vec<[f64; 2]>,
            #[serde(skip)]
            _p: std::marker::PhantomData<&'a ()>,
        }
        Repr {
            intervals: self.intervals.iter().map(|iv| [iv.lo, iv.hi]).collect(),
            _p: std::marker::PhantomData,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            intervals: Vec<[f64; 2]>,
        }
        let r = Repr::deserialize(de)?;
        for [lo, hi] in &r.intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(D::Error::custom(format!("bad interval [{lo}, {hi}]")));
            }
        }
        Ok(IntervalSet::from_intervals(
            r.intervals.into_iter().map(|[lo, hi]| Interval::new(lo, hi)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn intersect_basic() {
        let a = IntervalSet::single(Interval::new(0.0, 3.0));
        let b = IntervalSet::single(Interval::new(1.0, 5.0));
        assert_eq!(a.intersect(&b).intervals(), &[Interval::new(1.0, 3.0)]);
    }

    #[test]
    fn intersect_disjoint_is_empty() {
        let a = IntervalSet::single(Interval::new(0.0, 1.0));
        let b = IntervalSet::single(Interval::new(2.0, 3.0));
        assert!(a.intersect(&b).is_empty());
    }

    #[test]
    fn intersect_union_with_straddling_interval() {
        let a = IntervalSet::from_intervals([Interval::new(0.0, 1.0), Interval::new(2.0, 4.0)]);
        let b = IntervalSet::single(Interval::new(0.5, 2.5));
        assert_eq!(
            a.intersect(&b).intervals(),
            &[Interval::new(0.5, 1.0), Interval::new(2.0, 2.5)]
        );
    }

    #[test]
    fn touching_intervals_merge_on_construction() {
        let s = IntervalSet::from_intervals([Interval::new(0.0, 1.0), Interval::new(1.0, 2.0)]);
        assert_eq!(s.count(), 1);
        assert_eq!(s.intervals()[0], Interval::new(0.0, 2.0));
    }

    #[test]
    fn json_round_trip() {
        let s = IntervalSet::from_intervals([Interval::new(0.5, 1.0), Interval::new(2.0, 2.0)]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"intervals":[[0.5,1.0],[2.0,2.0]]}"#);
        let back: IntervalSet = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_intervals() {
        assert!(serde_json::from_str::<IntervalSet>(r#"{"intervals":[],"x":1}"#).is_err());
        assert!(serde_json::from_str::<IntervalSet>(r#"{"intervals":[[2.0,1.0]]}"#).is_err());
    }

    proptest! {
        // Normalization invariant: output sorted, strictly disjoint.
        #[test]
        fn normalized_after_construction(raw in proptest::collection::vec((0.0f64..10.0, 0.0f64..2.0), 0..12)) {
            let s = IntervalSet::from_intervals(raw.into_iter().map(|(lo, w)| Interval::new(lo, lo + w)));
            let ivs = s.intervals();
            for w in ivs.windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
        }

        // Membership agrees between a set and its union/intersection with another.
        #[test]
        fn set_algebra_membership(
            raw_a in proptest::collection::vec((0.0f64..10.0, 0.0f64..2.0), 0..8),
            raw_b in proptest::collection::vec((0.0f64..10.0, 0.0f64..2.0), 0..8),
            x in 0.0f64..12.0,
        ) {
            let a = IntervalSet::from_intervals(raw_a.into_iter().map(|(lo, w)| Interval::new(lo, lo + w)));
            let b = IntervalSet::from_intervals(raw_b.into_iter().map(|(lo, w)| Interval::new(lo, lo + w)));
            prop_assert_eq!(a.intersect(&b).contains(x), a.contains(x) && b.contains(x));
            prop_assert_eq!(a.union(&b).contains(x), a.contains(x) || b.contains(x));
        }
    }
}
