//! Builds new spaces from old ones and shows which checks back the claim.
//!
//! ```text
//! cargo run --example transforms
//! ```

use pmt::axioms::CheckConfig;
use pmt::spaces::{eval_distance, Domain, Oracle, Point, Sampler, SpaceClass, SpaceDescriptor};
use pmt::transforms::{TransformKind, TransformOutcome, TransformSpec};

fn summary(kind: &str, out: &TransformOutcome) {
    let failed: Vec<_> = out.checks.iter().filter(|c| !c.check.passed()).map(|c| c.check.axiom).collect();
    println!(
        "{kind:>9}: K={} n={} class={} verified={} checks={} failed={failed:?}",
        out.space.coeff_k(),
        out.space.polygon_order(),
        out.space.class_claim(),
        out.space.claim_verified(),
        out.checks.len(),
    );
    for w in &out.warnings {
        println!("           warning: {w}");
    }
}

fn main() -> pmt::Result<()> {
    let max = SpaceDescriptor::builder(Oracle::Max, Domain::unit()).class(SpaceClass::Kpms).build()?;
    let metric = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).class(SpaceClass::Metric).build()?;
    let sampler = Sampler::new(11, Domain::unit());
    let cfg = CheckConfig::default();

    let pt = TransformSpec::new(TransformKind::Pt).apply(&max, &sampler, &cfg)?;
    summary("pt", &pt);
    let (x, y) = (Point::scalar(0.2), Point::scalar(0.75));
    println!("           p^t(0.2, 0.75) = {}", eval_distance(&pt.space, &x, &y)?);

    let dp = TransformSpec::new(TransformKind::Dp).apply(&max, &sampler, &cfg)?;
    summary("dp", &dp);
    println!(
        "           d_p(0.4, 0.4) = {}, d_p(0.4, 0.5) = {}",
        eval_distance(&dp.space, &Point::scalar(0.4), &Point::scalar(0.4))?,
        eval_distance(&dp.space, &Point::scalar(0.4), &Point::scalar(0.5))?
    );

    let sq = TransformSpec::new(TransformKind::Power).with_q(2.0).apply(&max, &sampler, &cfg)?;
    summary("power 2", &sq);

    let bp = TransformSpec::new(TransformKind::Basepoint)
        .with_x0(Point::scalar(0.0))
        .apply(&metric, &sampler, &cfg)?;
    summary("basepoint", &bp);

    let b_metric = SpaceDescriptor::builder(Oracle::pow(Oracle::AbsDiff, 2.0), Domain::unit())
        .coefficient(2.0)
        .class(SpaceClass::MetricType)
        .build()?;
    let sum = TransformSpec::new(TransformKind::Sum).with_second(b_metric).apply(&max, &sampler, &cfg)?;
    summary("sum", &sum);
    Ok(())
}
