//! Points, distance oracles, space descriptors, self-maps and samplers.
//!
//! A [`SpaceDescriptor`] bundles a distance oracle with the coefficient `K`,
//! the polygon order `n`, a domain box and the class the caller claims for
//! the space. Everything else in the crate takes one of these as input.

mod domain;
mod maps;
mod oracle;
mod sampler;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use domain::{Domain, Interval, Point};
pub use maps::{MapFamily, SelfMap};
pub use oracle::{CustomOracle, Oracle};
pub use sampler::{Sampler, DEFAULT_BUDGET, DEFAULT_GRID_DENSITY, DEFAULT_MARGIN};

use crate::error::{Error, Result};

/// Default absolute comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The taxonomy a space descriptor may claim membership of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpaceClass {
    /// Partial metric type space with coefficient `K` and polygon order `n`.
    #[serde(rename = "KPMS")]
    Kpms,
    PartialBMetric,
    PartialRectangular,
    MetricType,
    Metric,
}

impl fmt::Display for SpaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceClass::Kpms => "KPMS",
            SpaceClass::PartialBMetric => "PartialBMetric",
            SpaceClass::PartialRectangular => "PartialRectangular",
            SpaceClass::MetricType => "MetricType",
            SpaceClass::Metric => "Metric",
        };
        f.write_str(s)
    }
}

/// Where a derived space came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub kind: String,
}

/// A distance oracle together with its declared structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SpaceDocument", into = "SpaceDocument")]
pub struct SpaceDescriptor {
    oracle: Oracle,
    coeff_k: f64,
    polygon_order: u32,
    domain: Domain,
    class_claim: SpaceClass,
    hausdorff: bool,
    complete: bool,
    claim_verified: bool,
    provenance: Option<Provenance>,
}

impl SpaceDescriptor {
    pub fn builder(oracle: Oracle, domain: Domain) -> SpaceBuilder {
        SpaceBuilder {
            space: SpaceDescriptor {
                oracle,
                coeff_k: 1.0,
                polygon_order: 1,
                domain,
                class_claim: SpaceClass::Kpms,
                hausdorff: false,
                complete: false,
                claim_verified: true,
                provenance: None,
            },
        }
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn coeff_k(&self) -> f64 {
        self.coeff_k
    }

    pub fn polygon_order(&self) -> u32 {
        self.polygon_order
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn class_claim(&self) -> SpaceClass {
        self.class_claim
    }

    pub fn hausdorff_asserted(&self) -> bool {
        self.hausdorff
    }

    pub fn complete_asserted(&self) -> bool {
        self.complete
    }

    /// False when the class claim is not backed by a known result and has
    /// to be confirmed by sampling.
    pub fn claim_verified(&self) -> bool {
        self.claim_verified
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Re-opens the descriptor for modification; `build` re-validates.
    pub fn to_builder(&self) -> SpaceBuilder {
        SpaceBuilder {
            space: self.clone(),
        }
    }

    /// Oracle value without domain checks. Callers guarantee membership.
    pub(crate) fn raw(&self, x: &Point, y: &Point) -> f64 {
        self.oracle.eval(x.coords(), y.coords())
    }

    pub fn eval_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        eval_distance(self, x, y)
    }

    pub fn self_distance(&self, x: &Point) -> Result<f64> {
        self_distance(self, x)
    }

    /// Serializes to the JSON space document.
    pub fn to_json(&self) -> Result<String> {
        if self.oracle.has_custom() {
            return Err(Error::rejected(
                "spaces with custom oracles cannot be written as documents",
            ));
        }
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub struct SpaceBuilder {
    space: SpaceDescriptor,
}

impl SpaceBuilder {
    pub fn coefficient(mut self, k: f64) -> Self {
        self.space.coeff_k = k;
        self
    }

    pub fn polygon_order(mut self, n: u32) -> Self {
        self.space.polygon_order = n;
        self
    }

    pub fn class(mut self, class: SpaceClass) -> Self {
        self.space.class_claim = class;
        self
    }

    pub fn complete(mut self, yes: bool) -> Self {
        self.space.complete = yes;
        self
    }

    pub fn hausdorff(mut self, yes: bool) -> Self {
        self.space.hausdorff = yes;
        self
    }

    pub fn claim_verified(mut self, yes: bool) -> Self {
        self.space.claim_verified = yes;
        self
    }

    pub fn provenance(mut self, source: impl Into<String>, kind: impl Into<String>) -> Self {
        self.space.provenance = Some(Provenance {
            source: source.into(),
            kind: kind.into(),
        });
        self
    }

    pub fn build(self) -> Result<SpaceDescriptor> {
        let s = self.space;
        if !(s.coeff_k.is_finite() && s.coeff_k >= 1.0) {
            return Err(Error::rejected(format!("coefficient K = {} must be >= 1", s.coeff_k)));
        }
        if s.polygon_order < 1 {
            return Err(Error::rejected("polygon order n must be >= 1"));
        }
        match s.class_claim {
            SpaceClass::PartialBMetric if s.polygon_order != 1 => {
                return Err(Error::rejected("a partial b-metric claim requires n = 1"));
            }
            SpaceClass::PartialRectangular if s.polygon_order != 2 || s.coeff_k != 1.0 => {
                return Err(Error::rejected(
                    "a partial rectangular claim requires n = 2 and K = 1",
                ));
            }
            _ => {}
        }
        if let Oracle::Basepoint { x0, .. } = &s.oracle {
            if x0.dim() != s.domain.dim() {
                return Err(Error::rejected("basepoint dimension does not match the domain"));
            }
        }
        Ok(s)
    }
}

/// Oracle value `p(x, y)` for two domain points.
pub fn eval_distance(space: &SpaceDescriptor, x: &Point, y: &Point) -> Result<f64> {
    space.domain.check(x)?;
    space.domain.check(y)?;
    let v = space.raw(x, y);
    if !v.is_finite() {
        return Err(Error::rejected(format!("oracle returned {v} at ({x}, {y})")));
    }
    Ok(v)
}

/// `p(x, x)`.
pub fn self_distance(space: &SpaceDescriptor, x: &Point) -> Result<f64> {
    eval_distance(space, x, x)
}

/// Open-ball membership: `p(center, y) < radius + p(center, center)`.
pub fn ball_contains(space: &SpaceDescriptor, center: &Point, radius: f64, y: &Point) -> Result<bool> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::rejected(format!("ball radius {radius} must be positive")));
    }
    let p = eval_distance(space, center, y)?;
    let own = self_distance(space, center)?;
    Ok(p < radius + own)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OracleDoc {
    Tree(Oracle),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct SpaceDocument {
    oracle: OracleDoc,
    #[serde(rename = "K")]
    k: f64,
    n: u32,
    domain: Domain,
    class: SpaceClass,
    hausdorff: bool,
    #[serde(default)]
    complete: bool,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl TryFrom<SpaceDocument> for SpaceDescriptor {
    type Error = Error;

    fn try_from(doc: SpaceDocument) -> Result<Self> {
        let oracle = match doc.oracle {
            OracleDoc::Tree(o) => o,
            OracleDoc::Named(name) => crate::fixtures::get_fixture(&name)?.space.oracle().clone(),
        };
        let mut b = SpaceDescriptor::builder(oracle, doc.domain)
            .coefficient(doc.k)
            .polygon_order(doc.n)
            .class(doc.class)
            .hausdorff(doc.hausdorff)
            .complete(doc.complete)
            .claim_verified(doc.verified);
        if let Some(p) = doc.provenance {
            b = b.provenance(p.source, p.kind);
        }
        b.build()
    }
}

impl From<SpaceDescriptor> for SpaceDocument {
    fn from(s: SpaceDescriptor) -> Self {
        SpaceDocument {
            oracle: OracleDoc::Tree(s.oracle),
            k: s.coeff_k,
            n: s.polygon_order,
            domain: s.domain,
            class: s.class_claim,
            hausdorff: s.hausdorff,
            complete: s.complete,
            verified: s.claim_verified,
            provenance: s.provenance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> SpaceDescriptor {
        SpaceDescriptor::builder(Oracle::max_power_plus_abs_power(2.0), Domain::closed(0.0, 10.0).unwrap())
            .coefficient(4.0)
            .class(SpaceClass::PartialBMetric)
            .build()
            .unwrap()
    }

    fn e2() -> SpaceDescriptor {
        let o = Oracle::Sum(vec![Oracle::pow(Oracle::AbsDiff, 2.0), Oracle::Const(2.0)]);
        SpaceDescriptor::builder(o, Domain::open(0.0, 1.0).unwrap())
            .coefficient(2.0)
            .class(SpaceClass::PartialBMetric)
            .build()
            .unwrap()
    }

    fn p(x: f64) -> Point {
        Point::scalar(x)
    }

    #[test]
    fn eval_distance_examples() {
        assert_eq!(eval_distance(&e1(), &p(1.0), &p(2.0)).unwrap(), 5.0);
        assert_eq!(eval_distance(&e1(), &p(0.0), &p(0.0)).unwrap(), 0.0);
        assert_eq!(eval_distance(&e2(), &p(0.25), &p(0.75)).unwrap(), 2.25);
    }

    #[test]
    fn self_distance_examples() {
        assert_eq!(self_distance(&e2(), &p(0.5)).unwrap(), 2.0);
        assert_eq!(self_distance(&e1(), &p(3.0)).unwrap(), 9.0);
        let metric = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).build().unwrap();
        assert_eq!(self_distance(&metric, &p(0.37)).unwrap(), 0.0);
    }

    #[test]
    fn domain_violations_are_rejected() {
        assert!(matches!(
            eval_distance(&e2(), &p(0.0), &p(0.5)),
            Err(Error::Domain { .. })
        ));
        assert!(eval_distance(&e1(), &p(11.0), &p(0.5)).is_err());
    }

    #[test]
    fn ball_examples() {
        let s = e2();
        assert!(ball_contains(&s, &p(0.5), 0.1, &p(0.75)).unwrap());
        assert!(ball_contains(&s, &p(0.3), 1e-12, &p(0.3)).unwrap());
        assert!(!ball_contains(&s, &p(0.1), 0.01, &p(0.9)).unwrap());
        assert!(ball_contains(&s, &p(0.1), 0.0, &p(0.9)).is_err());
        assert!(ball_contains(&s, &p(0.1), -1.0, &p(0.9)).is_err());
    }

    #[test]
    fn class_claim_constraints() {
        let b = || SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit());
        assert!(b().coefficient(0.5).build().is_err());
        assert!(b().polygon_order(0).build().is_err());
        assert!(b().class(SpaceClass::PartialBMetric).polygon_order(2).build().is_err());
        assert!(b().class(SpaceClass::PartialRectangular).polygon_order(2).coefficient(2.0).build().is_err());
        assert!(b().class(SpaceClass::PartialRectangular).polygon_order(2).build().is_ok());
    }

    #[test]
    fn document_shape() {
        let json = e2().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["K"], 2.0);
        assert_eq!(v["n"], 1);
        assert_eq!(v["class"], "PartialBMetric");
        assert_eq!(v["hausdorff"], false);
        assert_eq!(v["domain"], serde_json::json!([[0.0, 1.0, true, true]]));
        let back = SpaceDescriptor::from_json(&json).unwrap();
        assert_eq!(back.raw(&p(0.25), &p(0.75)), 2.25);
    }

    #[test]
    fn document_by_fixture_name() {
        let text = r#"{"oracle": "E2-open-interval", "K": 2, "n": 1,
            "domain": [[0, 1, true, true]], "class": "PartialBMetric", "hausdorff": false}"#;
        let s = SpaceDescriptor::from_json(text).unwrap();
        assert_eq!(s.eval_distance(&p(0.25), &p(0.75)).unwrap(), 2.25);
        let bad = text.replace("E2-open-interval", "E9-nope");
        assert!(SpaceDescriptor::from_json(&bad).is_err());
    }
}
