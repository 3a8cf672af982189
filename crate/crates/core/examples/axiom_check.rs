//! Samples pm1-pm4 and D1-D3 on a few spaces and prints the verdicts.
//!
//! ```text
//! cargo run --example axiom_check
//! ```

use pmt::axioms::{check_all, classify, CheckConfig};
use pmt::spaces::{Domain, Oracle, Sampler, SpaceClass, SpaceDescriptor};

fn show(name: &str, space: &SpaceDescriptor) -> pmt::Result<()> {
    let sampler = Sampler::new(7, space.domain().clone());
    let cfg = CheckConfig::default();
    let report = check_all(space, &sampler, &cfg)?;
    let verdicts: Vec<String> = report.per_axiom.iter().map(|(a, v)| format!("{a}={v:?}")).collect();
    println!("{name}");
    println!("  {}", verdicts.join(" "));
    println!("  sampled min K ~ {:.4} (declared {})", report.min_k_estimate.unwrap_or(f64::NAN), space.coeff_k());
    if let Some(w) = report.witnesses.first() {
        println!("  first witness: {} lhs={:.6} rhs={:.6} at {:?}", w.axiom, w.lhs, w.rhs, w.points);
    }
    let classes = classify(space, &sampler, &cfg)?;
    println!("  classes: {classes:?}");
    Ok(())
}

fn main() -> pmt::Result<()> {
    // max{x,y}^2 + |x-y|^2 on [0,10]: a partial b-metric with K = 4.
    let maxpow = SpaceDescriptor::builder(Oracle::max_power_plus_abs_power(2.0), Domain::closed(0.0, 10.0)?)
        .coefficient(4.0)
        .class(SpaceClass::PartialBMetric)
        .build()?;
    show("max^2 + |x-y|^2 on [0,10], K = 4", &maxpow)?;

    // |x-y| + 2: every point sits at self-distance 2.
    let shifted = SpaceDescriptor::builder(Oracle::affine(1.0, 2.0, Oracle::AbsDiff), Domain::open(0.0, 1.0)?)
        .coefficient(2.0)
        .class(SpaceClass::PartialBMetric)
        .build()?;
    show("|x-y| + 2 on (0,1), K = 2", &shifted)?;

    // An asymmetric candidate; pm3 should fail with a witness.
    let lopsided = SpaceDescriptor::builder(Oracle::ForwardExcess, Domain::unit()).build()?;
    show("max{x-y, 0} on [0,1]", &lopsided)?;
    Ok(())
}
