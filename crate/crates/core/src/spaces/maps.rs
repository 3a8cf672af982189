use std::fmt;
use std::sync::Arc;

use super::{Point, Sampler, SpaceDescriptor};
use crate::error::{Error, Result};

type PointFn = dyn Fn(&Point) -> Point + Send + Sync;
type Generator = dyn Fn(u64) -> SelfMap + Send + Sync;

/// A pure self-map of a space.
#[derive(Clone)]
pub struct SelfMap {
    label: String,
    f: Arc<PointFn>,
}

impl SelfMap {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        SelfMap {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn identity() -> Self {
        SelfMap::new("id", Point::clone)
    }

    /// `x -> scale * x + shift`, coordinatewise.
    pub fn affine(scale: f64, shift: f64) -> Self {
        let label = match (scale, shift) {
            (s, 0.0) => format!("{s}*x"),
            (s, b) => format!("{s}*x + {b}"),
        };
        SelfMap::new(label, move |p: &Point| {
            Point::from_coords_unchecked(p.coords().iter().map(|c| scale * c + shift).collect())
        })
    }

    /// `x -> x / divisor`, coordinatewise. Exact when the divisor is a power of two.
    pub fn divide_by(divisor: f64) -> Self {
        SelfMap::new(format!("x/{divisor}"), move |p: &Point| {
            Point::from_coords_unchecked(p.coords().iter().map(|c| c / divisor).collect())
        })
    }

    pub fn constant(value: Point) -> Self {
        SelfMap::new(format!("const {value}"), move |_: &Point| value.clone())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, x: &Point) -> Point {
        (self.f)(x)
    }

    pub(crate) fn relabel(mut self, label: String) -> Self {
        self.label = label;
        self
    }

    /// Checks on sampled points that the image stays inside the space's domain.
    pub fn check_maps_into(&self, space: &SpaceDescriptor, sampler: &Sampler) -> Result<()> {
        for x in sampler.points() {
            let y = self.apply(&x);
            if !space.domain().contains(&y) {
                return Err(Error::rejected(format!(
                    "map {} sends {x} to {y}, outside the domain",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfMap").field("label", &self.label).finish()
    }
}

/// A countable family `{T_n}` indexed from 1.
#[derive(Clone)]
pub struct MapFamily {
    label: String,
    generator: Arc<Generator>,
}

impl MapFamily {
    pub fn new<G>(label: impl Into<String>, generator: G) -> Self
    where
        G: Fn(u64) -> SelfMap + Send + Sync + 'static,
    {
        MapFamily {
            label: label.into(),
            generator: Arc::new(generator),
        }
    }

    /// `T_i(x) = x / base^i`.
    pub fn geometric_divisor(base: f64) -> Self {
        MapFamily::new(format!("x/{base}^i"), move |i| {
            let exp = i32::try_from(i).unwrap_or(i32::MAX);
            SelfMap::divide_by(base.powi(exp)).relabel(format!("x/{base}^{i}"))
        })
    }

    pub fn constant(value: Point) -> Self {
        MapFamily::new(format!("const {value}"), move |_| SelfMap::constant(value.clone()))
    }

    /// Every index maps to the same map.
    pub fn repeated(map: SelfMap) -> Self {
        MapFamily::new(map.label().to_string(), move |_| map.clone())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn member(&self, index: u64) -> Result<SelfMap> {
        if index == 0 {
            return Err(Error::rejected("map families are indexed from 1"));
        }
        Ok((self.generator)(index))
    }
}

impl fmt::Debug for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapFamily").field("label", &self.label).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_family_members() {
        let fam = MapFamily::geometric_divisor(16.0);
        let t2 = fam.member(2).unwrap();
        assert_eq!(t2.apply(&Point::scalar(1.0)).x(), 1.0 / 256.0);
        assert!(fam.member(0).is_err());
    }

    #[test]
    fn affine_and_constant() {
        let m = SelfMap::affine(0.5, 0.25);
        assert_eq!(m.apply(&Point::scalar(0.5)).x(), 0.5);
        let c = SelfMap::constant(Point::scalar(0.3));
        assert_eq!(c.apply(&Point::scalar(0.9)).x(), 0.3);
    }
}
