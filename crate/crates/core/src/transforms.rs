//! Constructions between partial metric types and metric types.
//!
//! Each transform samples the hypotheses it relies on. A failed
//! hypothesis does not stop the construction: it is listed in the
//! outcome's warnings and the output's class claim is marked unverified.

use serde::{Deserialize, Serialize};

use crate::axioms::{
    self, check_metric_type, check_metric_type_with, check_pm1, check_pm2, check_pm3, check_pm4, check_pm4_with,
    AxiomCheck, CheckConfig,
};
use crate::error::{Error, Result};
use crate::spaces::{Oracle, Point, Sampler, SpaceClass, SpaceDescriptor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Pt,
    Basepoint,
    Dp,
    Power,
    Sum,
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pt" => TransformKind::Pt,
            "basepoint" => TransformKind::Basepoint,
            "dp" => TransformKind::Dp,
            "power" => TransformKind::Power,
            "sum" => TransformKind::Sum,
            other => return Err(Error::rejected(format!("unknown transform `{other}`"))),
        })
    }
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Pt => "pt",
            TransformKind::Basepoint => "basepoint",
            TransformKind::Dp => "dp",
            TransformKind::Power => "power",
            TransformKind::Sum => "sum",
        }
    }
}

/// A transform together with its parameters.
#[derive(Clone, Debug)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub x0: Option<Point>,
    pub q: Option<f64>,
    pub second: Option<SpaceDescriptor>,
}

impl TransformSpec {
    pub fn new(kind: TransformKind) -> Self {
        TransformSpec {
            kind,
            x0: None,
            q: None,
            second: None,
        }
    }

    pub fn with_x0(mut self, x0: Point) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_second(mut self, space: SpaceDescriptor) -> Self {
        self.second = Some(space);
        self
    }

    /// Parameters must be present exactly when the kind uses them.
    pub fn validate(&self) -> Result<()> {
        let want = (
            self.kind == TransformKind::Basepoint,
            self.kind == TransformKind::Power,
            self.kind == TransformKind::Sum,
        );
        let have = (self.x0.is_some(), self.q.is_some(), self.second.is_some());
        for (needed, present, name) in [(want.0, have.0, "x0"), (want.1, have.1, "q"), (want.2, have.2, "second space")] {
            if needed && !present {
                return Err(Error::rejected(format!("`{}` needs {name}", self.kind.name())));
            }
            if !needed && present {
                return Err(Error::rejected(format!("`{}` does not take {name}", self.kind.name())));
            }
        }
        Ok(())
    }

    pub fn apply(&self, space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<TransformOutcome> {
        self.validate()?;
        match self.kind {
            TransformKind::Pt => to_pt(space, sampler, cfg),
            TransformKind::Basepoint => {
                from_metric_with_basepoint(space, self.x0.as_ref().expect("validated"), sampler, cfg)
            }
            TransformKind::Dp => induced_dp(space, sampler, cfg),
            TransformKind::Power => power_pms(space, self.q.expect("validated"), sampler, cfg),
            TransformKind::Sum => sum_pm_bm(space, self.second.as_ref().expect("validated"), sampler, cfg),
        }
    }
}

/// A constructed space with the sampled checks behind it.
#[derive(Clone, Debug, Serialize)]
pub struct TransformOutcome {
    pub space: SpaceDescriptor,
    pub checks: Vec<LabelledCheck>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabelledCheck {
    pub label: String,
    #[serde(flatten)]
    pub check: AxiomCheck,
}

struct Ledger {
    checks: Vec<LabelledCheck>,
    warnings: Vec<String>,
}

impl Ledger {
    fn new() -> Self {
        Ledger {
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn record(&mut self, label: &str, check: AxiomCheck) -> bool {
        let ok = check.passed();
        if !ok {
            self.warnings.push(format!(
                "{label}: {} failed ({} witness(es) in {} samples)",
                check.axiom,
                check.witnesses.len(),
                check.samples
            ));
        }
        self.checks.push(LabelledCheck {
            label: label.to_string(),
            check,
        });
        ok
    }

    // Records every check, so no short-circuiting `all`.
    #[allow(clippy::unnecessary_fold)]
    fn record_all(&mut self, label: &str, checks: Vec<AxiomCheck>) -> bool {
        checks.into_iter().fold(true, |ok, c| self.record(label, c) && ok)
    }

    fn finish(self, space: SpaceDescriptor) -> TransformOutcome {
        TransformOutcome {
            space,
            checks: self.checks,
            warnings: self.warnings,
        }
    }
}

fn partial_metric_base(ledger: &mut Ledger, label: &str, space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<bool> {
    let a = ledger.record(label, check_pm1(space, sampler, cfg)?);
    let b = ledger.record(label, check_pm2(space, sampler, cfg)?);
    let c = ledger.record(label, check_pm3(space, sampler, cfg)?);
    Ok(a && b && c)
}

/// `p^t(x,y) = 2 p(x,y) - p(x,x) - p(y,y)`.
///
/// The result claims a metric type with the input's `(n, K)`. The claim
/// is only established for `K = 1`; for larger `K` it is marked
/// unverified and D1 to D3 are sampled on the output.
pub fn to_pt(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<TransformOutcome> {
    let mut ledger = Ledger::new();
    let base_ok = partial_metric_base(&mut ledger, "input", space, sampler, cfg)?;

    let oracle = Oracle::PartialToMetric(Box::new(space.oracle().clone()));
    let out = SpaceDescriptor::builder(oracle, space.domain().clone())
        .coefficient(space.coeff_k())
        .polygon_order(space.polygon_order())
        .class(SpaceClass::MetricType)
        .complete(space.complete_asserted())
        .hausdorff(space.hausdorff_asserted())
        .provenance(space.oracle().to_string(), TransformKind::Pt.name())
        .build()?;

    for (x, y) in sampler.pairs() {
        let v = out.raw(&x, &y);
        if v < -cfg.tol {
            return Err(Error::Construction {
                x,
                y,
                reason: format!("p^t = {v} is negative; p(x,x) <= p(x,y) fails here"),
            });
        }
    }

    let mut verified = base_ok;
    if space.coeff_k() > 1.0 {
        ledger.warnings.push(format!(
            "metric-type claim for K = {} is unproven; D1-D3 were sampled on the output",
            space.coeff_k()
        ));
        verified = false;
        ledger.record_all("output", check_metric_type(&out, sampler, cfg)?);
    }
    let out = out.to_builder().claim_verified(verified).build()?;
    Ok(ledger.finish(out))
}

/// `p(x,y) = (d(x,y) + d(x,x0) + d(y,x0)) / 2` from a metric `d`.
///
/// The basepoint hypothesis `d(x0,x) <= d(x,y)` for distinct sampled
/// `x, y` is reported as a warning when it fails.
pub fn from_metric_with_basepoint(
    metric: &SpaceDescriptor,
    x0: &Point,
    sampler: &Sampler,
    cfg: &CheckConfig,
) -> Result<TransformOutcome> {
    metric.domain().check(x0)?;
    let mut ledger = Ledger::new();
    let metric_ok = ledger.record_all("input", check_metric_type_with(metric, sampler, 1, 1.0, cfg)?);

    let mut misses = 0usize;
    let mut first = None;
    let pairs = sampler.pairs();
    for (x, y) in &pairs {
        if x == y {
            continue;
        }
        if metric.raw(x0, x) > metric.raw(x, y) + cfg.tol {
            misses += 1;
            first.get_or_insert_with(|| (x.clone(), y.clone()));
        }
    }
    if let Some((x, y)) = first {
        ledger.warnings.push(format!(
            "basepoint hypothesis d(x0,x) <= d(x,y) fails on {misses} of {} sampled pairs, e.g. x = {x}, y = {y}",
            pairs.len()
        ));
    }

    let oracle = Oracle::Basepoint {
        metric: Box::new(metric.oracle().clone()),
        x0: x0.clone(),
    };
    let out = SpaceDescriptor::builder(oracle, metric.domain().clone())
        .coefficient(1.0)
        .polygon_order(metric.polygon_order())
        .class(SpaceClass::Kpms)
        .complete(metric.complete_asserted())
        .hausdorff(metric.hausdorff_asserted())
        .claim_verified(metric_ok)
        .provenance(metric.oracle().to_string(), TransformKind::Basepoint.name())
        .build()?;
    Ok(ledger.finish(out))
}

/// `d_p`: zero on exact coordinate equality, `p(x,y)` elsewhere.
pub fn induced_dp(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<TransformOutcome> {
    let mut ledger = Ledger::new();
    let base_ok = partial_metric_base(&mut ledger, "input", space, sampler, cfg)?;
    let pm4_ok = ledger.record("input", check_pm4(space, sampler, space.polygon_order() as usize, cfg)?);

    let oracle = Oracle::InducedDp(Box::new(space.oracle().clone()));
    let out = SpaceDescriptor::builder(oracle, space.domain().clone())
        .coefficient(space.coeff_k())
        .polygon_order(space.polygon_order())
        .class(SpaceClass::MetricType)
        .complete(space.complete_asserted())
        .hausdorff(space.hausdorff_asserted())
        .claim_verified(base_ok && pm4_ok)
        .provenance(space.oracle().to_string(), TransformKind::Dp.name())
        .build()?;
    Ok(ledger.finish(out))
}

/// `p(x,y)^q` of a partial metric, with `K = 2^(q-1)`.
pub fn power_pms(space: &SpaceDescriptor, q: f64, sampler: &Sampler, cfg: &CheckConfig) -> Result<TransformOutcome> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::rejected(format!("power q = {q} must be at least 1")));
    }
    let mut ledger = Ledger::new();
    let base_ok = partial_metric_base(&mut ledger, "input", space, sampler, cfg)?;
    let pm4_ok = ledger.record("input", check_pm4_with(space, sampler, 1, 1.0, cfg)?);

    let oracle = if q == 1.0 {
        space.oracle().clone()
    } else {
        Oracle::pow(space.oracle().clone(), q)
    };
    let out = SpaceDescriptor::builder(oracle, space.domain().clone())
        .coefficient(2f64.powf(q - 1.0))
        .polygon_order(1)
        .class(SpaceClass::Kpms)
        .complete(space.complete_asserted())
        .hausdorff(space.hausdorff_asserted())
        .claim_verified(base_ok && pm4_ok)
        .provenance(space.oracle().to_string(), format!("{}:{q}", TransformKind::Power.name()))
        .build()?;
    Ok(ledger.finish(out))
}

/// Pointwise sum of a partial metric and a b-metric, on the intersection
/// of their domains, with the larger of the two coefficients. The polygon
/// inequality is sampled on the result.
pub fn sum_pm_bm(
    partial: &SpaceDescriptor,
    b_metric: &SpaceDescriptor,
    sampler: &Sampler,
    cfg: &CheckConfig,
) -> Result<TransformOutcome> {
    if partial.dim() != b_metric.dim() {
        return Err(Error::rejected(format!(
            "dimension mismatch: {} against {}",
            partial.dim(),
            b_metric.dim()
        )));
    }
    let domain = partial
        .domain()
        .intersect(b_metric.domain())
        .ok_or_else(|| Error::rejected("the two domains do not overlap"))?;
    let sampler = if sampler.region().is_subset_of(&domain) {
        sampler.clone()
    } else {
        Sampler::new(sampler.seed(), domain.clone())
            .with_grid_density(sampler.grid_density())
            .with_budget(sampler.budget())
    };

    let mut ledger = Ledger::new();
    let pm_ok = partial_metric_base(&mut ledger, "partial metric", partial, &sampler, cfg)?
        & ledger.record("partial metric", check_pm4_with(partial, &sampler, 1, partial.coeff_k(), cfg)?);
    let bm_ok = ledger.record_all(
        "b-metric",
        check_metric_type_with(b_metric, &sampler, 1, b_metric.coeff_k(), cfg)?,
    );

    let k = partial.coeff_k().max(b_metric.coeff_k());
    let oracle = Oracle::Sum(vec![partial.oracle().clone(), b_metric.oracle().clone()]);
    let out = SpaceDescriptor::builder(oracle, domain)
        .coefficient(k)
        .polygon_order(1)
        .class(SpaceClass::Kpms)
        .complete(partial.complete_asserted() && b_metric.complete_asserted())
        .hausdorff(partial.hausdorff_asserted() && b_metric.hausdorff_asserted())
        .provenance(
            format!("{} ; {}", partial.oracle(), b_metric.oracle()),
            TransformKind::Sum.name(),
        )
        .build()?;
    let post_ok = ledger.record("output", axioms::check_pm4(&out, &sampler, 1, cfg)?);
    let out = out.to_builder().claim_verified(pm_ok && bm_ok && post_ok).build()?;
    Ok(ledger.finish(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Domain;

    fn unit(o: Oracle, k: f64) -> SpaceDescriptor {
        SpaceDescriptor::builder(o, Domain::unit()).coefficient(k).build().unwrap()
    }

    fn sm() -> Sampler {
        Sampler::new(5, Domain::unit()).with_budget(2000)
    }

    fn at(s: &SpaceDescriptor, x: f64, y: f64) -> f64 {
        s.eval_distance(&Point::scalar(x), &Point::scalar(y)).unwrap()
    }

    #[test]
    fn pt_of_max_is_abs_diff() {
        let out = to_pt(&unit(Oracle::Max, 1.0), &sm(), &CheckConfig::default()).unwrap();
        assert_eq!(at(&out.space, 0.25, 0.75), 0.5);
        assert_eq!(at(&out.space, 0.4, 0.4), 0.0);
        assert!(out.space.claim_verified());
        assert_eq!(out.space.class_claim(), SpaceClass::MetricType);
    }

    #[test]
    fn pt_of_shifted_square() {
        let e2 = SpaceDescriptor::builder(
            Oracle::Sum(vec![Oracle::pow(Oracle::AbsDiff, 2.0), Oracle::Const(2.0)]),
            Domain::open(0.0, 1.0).unwrap(),
        )
        .coefficient(2.0)
        .build()
        .unwrap();
        let sampler = Sampler::new(1, e2.domain().clone()).with_budget(1000);
        let out = to_pt(&e2, &sampler, &CheckConfig::default()).unwrap();
        assert_eq!(at(&out.space, 0.25, 0.75), 0.5);
        assert!(!out.space.claim_verified());
        assert!(!out.warnings.is_empty());
    }

    #[test]
    fn pt_rejects_negative_values() {
        let bad = unit(Oracle::affine(-1.0, 2.0, Oracle::AbsDiff), 1.0);
        match to_pt(&bad, &sm(), &CheckConfig::default()) {
            Err(Error::Construction { x, y, .. }) => assert_ne!(x, y),
            other => panic!("expected a construction error, got {other:?}"),
        }
    }

    #[test]
    fn basepoint_examples() {
        let d = unit(Oracle::AbsDiff, 1.0);
        let out = from_metric_with_basepoint(&d, &Point::scalar(0.0), &sm(), &CheckConfig::default()).unwrap();
        assert!((at(&out.space, 0.2, 0.6) - 0.6).abs() < 1e-15);
        assert_eq!(at(&out.space, 0.0, 0.0), 0.0);
        assert_eq!(at(&out.space, 0.3, 0.3), 0.3);
        // d(0,x) <= |x-y| fails for nearby pairs away from 0.
        assert!(!out.warnings.is_empty());
        assert!(from_metric_with_basepoint(&d, &Point::scalar(2.0), &sm(), &CheckConfig::default()).is_err());
    }

    #[test]
    fn dp_examples() {
        let e1 = SpaceDescriptor::builder(Oracle::max_power_plus_abs_power(2.0), Domain::closed(0.0, 10.0).unwrap())
            .coefficient(4.0)
            .build()
            .unwrap();
        let sampler = Sampler::new(2, e1.domain().clone()).with_budget(1000);
        let out = induced_dp(&e1, &sampler, &CheckConfig::default()).unwrap();
        assert_eq!(at(&out.space, 1.0, 1.0), 0.0);
        assert_eq!(at(&e1, 1.0, 1.0), 1.0);
        assert_eq!(at(&out.space, 1.0, 2.0), 5.0);
        assert!(out.space.claim_verified());
    }

    #[test]
    fn power_examples() {
        let m = unit(Oracle::Max, 1.0);
        let out = power_pms(&m, 2.0, &sm(), &CheckConfig::default()).unwrap();
        assert_eq!(at(&out.space, 0.5, 1.0), 1.0);
        assert_eq!(out.space.coeff_k(), 2.0);
        let same = power_pms(&m, 1.0, &sm(), &CheckConfig::default()).unwrap();
        assert_eq!(at(&same.space, 0.3, 0.7), at(&m, 0.3, 0.7));
        assert!(power_pms(&m, 0.5, &sm(), &CheckConfig::default()).is_err());
    }

    #[test]
    fn sum_examples() {
        let pm = unit(Oracle::Max, 1.0);
        let bm = unit(Oracle::pow(Oracle::AbsDiff, 2.0), 2.0);
        let out = sum_pm_bm(&pm, &bm, &sm(), &CheckConfig::default()).unwrap();
        assert_eq!(at(&out.space, 0.0, 1.0), 2.0);
        assert_eq!(at(&out.space, 0.0, 0.0), 0.0);
        assert_eq!(out.space.coeff_k(), 2.0);

        let constant = unit(Oracle::Const(2.0), 1.0);
        let out = sum_pm_bm(&constant, &bm, &sm(), &CheckConfig::default()).unwrap();
        assert_eq!(at(&out.space, 0.25, 0.75), 2.25);
        // A constant fails pm1, so the result is not vouched for.
        assert!(!out.space.claim_verified());

        let plane = SpaceDescriptor::builder(
            Oracle::AbsDiff,
            Domain::new(vec![crate::spaces::Interval::closed(0.0, 1.0).unwrap(); 2]).unwrap(),
        )
        .build()
        .unwrap();
        assert!(sum_pm_bm(&pm, &plane, &sm(), &CheckConfig::default()).is_err());
    }

    #[test]
    fn spec_parameters_are_validated() {
        assert!(TransformSpec::new(TransformKind::Power).validate().is_err());
        assert!(TransformSpec::new(TransformKind::Pt).with_q(2.0).validate().is_err());
        assert!(TransformSpec::new(TransformKind::Basepoint)
            .with_x0(Point::scalar(0.0))
            .validate()
            .is_ok());
    }
}
