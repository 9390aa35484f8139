//! Value bands and disjoint interval sets.

use std::fmt;

use crate::error::{Error, Result};

/// A central value with an enclosing confidence band, `lo ≤ value ≤ hi`.
///
/// Used both for measured targets (95% CI) and for parameter uncertainty
/// bands that are propagated by interval arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Measured quantity with its 95% confidence interval.
pub type MeasuredBand = Band;

impl Band {
    pub fn new(value: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(value.is_finite() && lo.is_finite() && hi.is_finite()) {
            return Err(Error::param("band", "non-finite bound"));
        }
        if !(lo <= value && value <= hi) {
            return Err(Error::param(
                "band",
                format!("expected lo ≤ value ≤ hi, got {lo} / {value} / {hi}"),
            ));
        }
        Ok(Band { value, lo, hi })
    }

    pub fn symmetric(value: f64, half_width: f64) -> Result<Self> {
        Band::new(value, value - half_width.abs(), value + half_width.abs())
    }

    pub fn exact(value: f64) -> Self {
        Band {
            value,
            lo: value,
            hi: value,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn scaled(&self, k: f64) -> Band {
        let (a, b) = (self.lo * k, self.hi * k);
        Band {
            value: self.value * k,
            lo: a.min(b),
            hi: a.max(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "[{:.p$}, {:.p$}]", self.lo, self.hi),
            None => write!(f, "[{}, {}]", self.lo, self.hi),
        }
    }
}

/// Sorted union of disjoint closed intervals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// Builds a set from arbitrary intervals, merging any that overlap or
    /// touch. Reversed pairs are swapped.
    pub fn from_intervals(items: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = items
            .into_iter()
            .filter(|i| !i.lo.is_nan() && !i.hi.is_nan())
            .map(|i| Interval::new(i.lo.min(i.hi), i.lo.max(i.hi)))
            .collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for i in v {
            match out.last_mut() {
                Some(last) if i.lo <= last.hi => last.hi = last.hi.max(i.hi),
                _ => out.push(i),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.intervals.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::width).sum()
    }

    /// Smallest interval enclosing the whole set.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(Interval::new(first.lo, last.hi))
    }

    /// Keeps only the part of the set inside `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> IntervalSet {
        IntervalSet::from_intervals(
            self.intervals
                .iter()
                .filter(|i| i.hi >= lo && i.lo <= hi)
                .map(|i| Interval::new(i.lo.max(lo), i.hi.min(hi))),
        )
    }

    /// Removes everything strictly below `floor`.
    pub fn remove_below(&self, floor: f64) -> IntervalSet {
        self.clip(floor, f64::INFINITY)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (k, i) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " ∪ ")?;
            }
            fmt::Display::fmt(i, f)?;
        }
        Ok(())
    }
}
