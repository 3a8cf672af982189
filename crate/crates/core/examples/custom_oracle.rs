//! A user-supplied distance function, checked and then used in a solver.
//!
//! ```text
//! cargo run --example custom_oracle
//! ```

use pmt::axioms::{check_partial_metric_axioms, estimate_min_k, CheckConfig};
use pmt::solvers::{solve_pair_banach, SolverConfig};
use pmt::spaces::{Domain, Oracle, Point, Sampler, SelfMap, SpaceClass, SpaceDescriptor};

fn main() -> pmt::Result<()> {
    // max{x,y} + |x-y| on [0,1]^2, summed over coordinates.
    let oracle = Oracle::custom("max + |x-y|", |x: &[f64], y: &[f64]| {
        x.iter().zip(y).map(|(a, b)| a.max(*b) + (a - b).abs()).sum()
    });
    let domain = Domain::new(vec![
        pmt::spaces::Interval::closed(0.0, 1.0)?,
        pmt::spaces::Interval::closed(0.0, 1.0)?,
    ])?;
    let space = SpaceDescriptor::builder(oracle, domain.clone())
        .coefficient(2.0)
        .class(SpaceClass::PartialBMetric)
        .complete(true)
        .build()?;

    let sampler = Sampler::new(3, domain);
    let cfg = CheckConfig::default();
    let report = check_partial_metric_axioms(&space, &sampler, &cfg)?;
    println!("{:?}", report.per_axiom);
    let est = estimate_min_k(&space, &sampler, 1, &cfg)?;
    println!("sampled K lower bound {:.4} over {} chains", est.value, est.chains);

    let t = SelfMap::new("(x/3, y/3)", |p: &Point| {
        Point::new(p.coords().iter().map(|v| v / 3.0).collect()).expect("finite")
    });
    let x0 = Point::new(vec![1.0, 0.5])?;
    let r = solve_pair_banach(&space, &t, &t, 0.4, &x0, &SolverConfig::default())?;
    println!("x* = {} after {} steps, failed checks {:?}", r.point, r.trace.steps(), r.failed_checks);
    Ok(())
}
