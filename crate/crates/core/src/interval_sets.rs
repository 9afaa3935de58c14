//! Finite unions of subintervals of `[0, 1]` with exact endpoints.
//!
//! Open and closed endpoints are tracked separately, so a set like
//! `[0, 1/4) ∪ (1/2, 1]` is represented faithfully. Measures ignore the flags while
//! membership and distance respect them.

use std::cmp::Ordering;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact_poly::rational::{max, min, to_pq, Exact, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed, hi_closed }
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Less => false,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => true,
        }
    }

    pub fn length(&self) -> Rational {
        if self.is_empty() {
            Rational::zero()
        } else {
            &self.hi - &self.lo
        }
    }

    pub fn center(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }

    fn clip_unit(mut self) -> Self {
        if self.lo.is_negative() {
            self.lo = Rational::zero();
            self.lo_closed = true;
        }
        if self.hi > Rational::one() {
            self.hi = Rational::one();
            self.hi_closed = true;
        }
        self
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            to_pq(&self.lo),
            to_pq(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Sorted, pairwise disjoint, non-mergeable intervals inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// `[0, 1]`.
    pub fn unit() -> Self {
        Self::closed(&Rational::zero(), &Rational::one())
    }

    pub fn closed(lo: &Rational, hi: &Rational) -> Self {
        Self::from_intervals(vec![Interval::closed(lo.clone(), hi.clone())])
    }

    pub fn open(lo: &Rational, hi: &Rational) -> Self {
        Self::from_intervals(vec![Interval::open(lo.clone(), hi.clone())])
    }

    /// Clips every interval to `[0, 1]`, drops empty ones, sorts and merges.
    pub fn from_intervals(raw: Vec<Interval>) -> Self {
        let mut ivs: Vec<Interval> =
            raw.into_iter().map(Interval::clip_unit).filter(|iv| !iv.is_empty()).collect();
        ivs.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            if let Some(last) = out.last_mut() {
                let touches = iv.lo < last.hi
                    || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
                if touches {
                    match iv.hi.cmp(&last.hi) {
                        Ordering::Greater => {
                            last.hi = iv.hi;
                            last.hi_closed = iv.hi_closed;
                        }
                        Ordering::Equal => last.hi_closed |= iv.hi_closed,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.intervals.iter().fold(Rational::zero(), |acc, iv| acc + iv.length())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let idx = self.intervals.partition_point(|iv| &iv.lo <= x);
        // Only the last interval starting at or before x can contain it.
        idx > 0 && self.intervals[idx - 1].contains(x)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        Self::from_intervals(all)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let piece = a[i].intersect(&b[j]);
            if !piece.is_empty() {
                out.push(piece);
            }
            let a_first = match a[i].hi.cmp(&b[j].hi) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => !a[i].hi_closed || b[j].hi_closed,
            };
            if a_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    /// `[0, 1] ∖ S`.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = Rational::zero();
        let mut cursor_closed = true;
        for iv in &self.intervals {
            out.push(Interval::new(cursor, iv.lo.clone(), cursor_closed, !iv.lo_closed));
            cursor = iv.hi.clone();
            cursor_closed = !iv.hi_closed;
        }
        out.push(Interval::new(cursor, Rational::one(), cursor_closed, true));
        Self::from_intervals(out)
    }

    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.subtract(other).is_empty()
    }

    /// `inf { |x - y| : y in S }`.
    pub fn distance(&self, x: &Rational) -> Result<Rational> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        if self.contains(x) {
            return Ok(Rational::zero());
        }
        let best = self
            .intervals
            .iter()
            .map(|iv| {
                if x < &iv.lo {
                    &iv.lo - x
                } else if x > &iv.hi {
                    x - &iv.hi
                } else {
                    Rational::zero()
                }
            })
            .min()
            .unwrap();
        Ok(best)
    }

    /// `{ x in [0, 1] : d(x, S) < λ }`; `λ = 0` returns `S` unchanged.
    pub fn dilate(&self, lambda: &Rational) -> IntervalSet {
        if lambda.is_zero() {
            return self.clone();
        }
        Self::from_intervals(
            self.intervals
                .iter()
                .map(|iv| Interval::open(&iv.lo - lambda, &iv.hi + lambda))
                .collect(),
        )
    }

    /// Smallest closed interval containing the set.
    pub fn hull(&self) -> Option<(Rational, Rational)> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some((first.lo.clone(), last.hi.clone()))
    }

    /// Measure of `S ∩ [a, b]`.
    pub fn measure_within(&self, a: &Rational, b: &Rational) -> Rational {
        self.intervals.iter().fold(Rational::zero(), |acc, iv| {
            let lo = max(&iv.lo, a);
            let hi = min(&iv.hi, b);
            if lo < hi {
                acc + (hi - lo)
            } else {
                acc
            }
        })
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.intervals.iter().map(|iv| iv.to_string()).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalRecord {
    lo: Exact,
    hi: Exact,
    lo_closed: bool,
    hi_closed: bool,
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalRecord {
            lo: Exact(self.lo.clone()),
            hi: Exact(self.hi.clone()),
            lo_closed: self.lo_closed,
            hi_closed: self.hi_closed,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = IntervalRecord::deserialize(deserializer)?;
        Ok(Interval::new(r.lo.0, r.hi.0, r.lo_closed, r.hi_closed))
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.intervals.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(IntervalSet::from_intervals(Vec::<Interval>::deserialize(deserializer)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_poly::rational::{int, pow2, ratio};

    #[test]
    fn normalization_merges_touching_pieces() {
        let s = IntervalSet::from_intervals(vec![
            Interval::closed(ratio(1, 2), int(1)),
            Interval::closed(int(0), ratio(1, 2)),
        ]);
        assert_eq!(s, IntervalSet::unit());
        assert_eq!(s.measure(), int(1));
        // (0,1/2) and (1/2,1) stay apart: 1/2 is in neither.
        let gap = IntervalSet::from_intervals(vec![
            Interval::open(int(0), ratio(1, 2)),
            Interval::open(ratio(1, 2), int(1)),
        ]);
        assert_eq!(gap.len(), 2);
        assert!(!gap.contains(&ratio(1, 2)));
        // Half-open abutment merges.
        let joined = IntervalSet::from_intervals(vec![
            Interval::new(int(0), ratio(1, 2), false, true),
            Interval::open(ratio(1, 2), int(1)),
        ]);
        assert_eq!(joined.len(), 1);
    }

    #[test]
    fn subtraction_flags() {
        let s = IntervalSet::unit().subtract(&IntervalSet::closed(&ratio(1, 4), &ratio(1, 2)));
        assert_eq!(
            s.intervals(),
            &[
                Interval::new(int(0), ratio(1, 4), true, false),
                Interval::new(ratio(1, 2), int(1), false, true),
            ]
        );
        assert_eq!(IntervalSet::unit().subtract(&IntervalSet::empty()), IntervalSet::unit());
        let open = IntervalSet::open(&int(0), &int(1));
        let ends = open.complement();
        assert!(ends.contains(&int(0)) && ends.contains(&int(1)));
        assert_eq!(ends.measure(), int(0));
    }

    #[test]
    fn distances() {
        let w = pow2(-7);
        let s = IntervalSet::closed(&(ratio(1, 2) - &w), &(ratio(1, 2) + &w));
        assert_eq!(s.distance(&ratio(1, 3)).unwrap(), ratio(1, 6) - &w);
        assert_eq!(s.distance(&ratio(1, 2)).unwrap(), int(0));
        assert_eq!(IntervalSet::empty().distance(&int(0)), Err(Error::EmptySet));
    }

    #[test]
    fn dilation() {
        let s = IntervalSet::closed(&ratio(1, 4), &ratio(1, 2));
        let d = s.dilate(&ratio(1, 8));
        assert_eq!(d, IntervalSet::open(&ratio(1, 8), &ratio(5, 8)));
        let clipped = s.dilate(&int(1));
        assert_eq!(clipped, IntervalSet::unit());
        let open = IntervalSet::open(&ratio(1, 4), &ratio(1, 2));
        assert_eq!(open.dilate(&int(0)), open);
    }

    #[test]
    fn json_round_trip() {
        let s = IntervalSet::unit().subtract(&IntervalSet::open(&ratio(1, 3), &ratio(2, 3)));
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"[{"lo":"0/1","hi":"1/3","lo_closed":true,"hi_closed":true},{"lo":"2/3","hi":"1/1","lo_closed":true,"hi_closed":true}]"#
        );
        let back: IntervalSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
