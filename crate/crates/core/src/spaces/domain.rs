use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite real vector, the element type of every space in this crate.
///
/// Coordinates are always finite. Scalar spaces use one coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::rejected("a point needs at least one coordinate"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::rejected(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    /// One-coordinate point. Panics on non-finite input.
    pub fn scalar(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite coordinate {x}");
        Point(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// First coordinate; convenient for scalar spaces.
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    /// Sup-norm distance between coordinate vectors.
    pub fn sup_distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_coords_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::scalar(x)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// One axis of a domain box, with per-endpoint open/closed flags.
///
/// Serializes as `[lo, hi, openLo, openHi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64, bool, bool)", into = "(f64, f64, bool, bool)")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub open_lo: bool,
    pub open_hi: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, open_lo: bool, open_hi: bool) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::rejected("interval endpoints must be finite"));
        }
        let empty = lo > hi || (lo == hi && (open_lo || open_hi));
        if empty {
            return Err(Error::rejected(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval {
            lo,
            hi,
            open_lo,
            open_hi,
        })
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(lo, hi, false, false)
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(lo, hi, true, true)
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.open_lo { v > self.lo } else { v >= self.lo };
        let below = if self.open_hi { v < self.hi } else { v <= self.hi };
        above && below
    }

    /// Closed range used for sampling: open ends are pulled inward by `margin`.
    pub fn sampling_range(&self, margin: f64) -> (f64, f64) {
        let lo = if self.open_lo { self.lo + margin } else { self.lo };
        let hi = if self.open_hi { self.hi - margin } else { self.hi };
        (lo, hi.max(lo))
    }

    fn contains_interval(&self, other: &Interval) -> bool {
        let lo_ok = other.lo > self.lo
            || (other.lo == self.lo && (!self.open_lo || other.open_lo));
        let hi_ok = other.hi < self.hi
            || (other.hi == self.hi && (!self.open_hi || other.open_hi));
        lo_ok && hi_ok
    }
}

impl TryFrom<(f64, f64, bool, bool)> for Interval {
    type Error = Error;

    fn try_from((lo, hi, open_lo, open_hi): (f64, f64, bool, bool)) -> Result<Self> {
        Interval::new(lo, hi, open_lo, open_hi)
    }
}

impl From<Interval> for (f64, f64, bool, bool) {
    fn from(i: Interval) -> Self {
        (i.lo, i.hi, i.open_lo, i.open_hi)
    }
}

/// Axis-aligned box in R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct Domain(Vec<Interval>);

impl Domain {
    pub fn new(axes: Vec<Interval>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::rejected("a domain needs at least one axis"));
        }
        Ok(Domain(axes))
    }

    /// Closed scalar interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Domain::new(vec![Interval::closed(lo, hi)?])
    }

    /// Open scalar interval `(lo, hi)`.
    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Domain::new(vec![Interval::open(lo, hi)?])
    }

    pub fn unit() -> Self {
        Domain(vec![Interval {
            lo: 0.0,
            hi: 1.0,
            open_lo: false,
            open_hi: false,
        }])
    }

    pub fn axes(&self) -> &[Interval] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim() && self.0.iter().zip(p.coords()).all(|(i, &v)| i.contains(v))
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::Domain {
                point: p.clone(),
                reason: format!("dimension {} but the domain has {}", p.dim(), self.dim()),
            });
        }
        for (axis, (iv, &v)) in self.0.iter().zip(p.coords()).enumerate() {
            if !iv.contains(v) {
                return Err(Error::Domain {
                    point: p.clone(),
                    reason: format!(
                        "coordinate {axis} = {v} not in {}{}, {}{}",
                        if iv.open_lo { "(" } else { "[" },
                        iv.lo,
                        iv.hi,
                        if iv.open_hi { ")" } else { "]" },
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(mine, theirs)| theirs.contains_interval(mine))
    }

    /// Box intersection; `None` when the boxes are disjoint or of different dimension.
    pub fn intersect(&self, other: &Domain) -> Option<Domain> {
        if self.dim() != other.dim() {
            return None;
        }
        let mut axes = Vec::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(&other.0) {
            let (lo, open_lo) = match a.lo.partial_cmp(&b.lo)? {
                std::cmp::Ordering::Greater => (a.lo, a.open_lo),
                std::cmp::Ordering::Less => (b.lo, b.open_lo),
                std::cmp::Ordering::Equal => (a.lo, a.open_lo || b.open_lo),
            };
            let (hi, open_hi) = match a.hi.partial_cmp(&b.hi)? {
                std::cmp::Ordering::Less => (a.hi, a.open_hi),
                std::cmp::Ordering::Greater => (b.hi, b.open_hi),
                std::cmp::Ordering::Equal => (a.hi, a.open_hi || b.open_hi),
            };
            axes.push(Interval::new(lo, hi, open_lo, open_hi).ok()?);
        }
        Some(Domain(axes))
    }
}

impl TryFrom<Vec<Interval>> for Domain {
    type Error = Error;

    fn try_from(axes: Vec<Interval>) -> Result<Self> {
        Domain::new(axes)
    }
}

impl From<Domain> for Vec<Interval> {
    fn from(d: Domain) -> Self {
        d.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_endpoints_are_excluded() {
        let d = Domain::open(0.0, 1.0).unwrap();
        assert!(!d.contains(&Point::scalar(0.0)));
        assert!(!d.contains(&Point::scalar(1.0)));
        assert!(d.contains(&Point::scalar(0.5)));
        assert!(Domain::unit().contains(&Point::scalar(1.0)));
    }

    #[test]
    fn subset_respects_open_flags() {
        let open = Domain::open(0.0, 1.0).unwrap();
        let closed = Domain::unit();
        assert!(open.is_subset_of(&closed));
        assert!(!closed.is_subset_of(&open));
    }

    #[test]
    fn rejects_bad_points_and_intervals() {
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Interval::closed(1.0, 0.0).is_err());
        assert!(Interval::open(0.5, 0.5).is_err());
    }

    #[test]
    fn interval_json_shape() {
        let d = Domain::open(0.0, 1.0).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, "[[0.0,1.0,true,true]]");
        let back: Domain = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
