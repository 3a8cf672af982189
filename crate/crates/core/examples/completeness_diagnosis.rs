//! The sequence 1/(2n) under |x-y|^2 + 2 on (0,1): Cauchy with limit 2,
//! not 0-Cauchy, and without a limit point inside the interval.
//!
//! ```text
//! cargo run --example completeness_diagnosis
//! ```

use pmt::solvers::{detect_cauchy, limit_candidates, IterationTrace};
use pmt::spaces::{Domain, Oracle, Point, Sampler, SpaceDescriptor};

fn main() -> pmt::Result<()> {
    let space = SpaceDescriptor::builder(
        Oracle::affine(1.0, 2.0, Oracle::pow(Oracle::AbsDiff, 2.0)),
        Domain::open(0.0, 1.0)?,
    )
    .coefficient(2.0)
    .build()?;

    let pts: Vec<Point> = (1..=200).map(|n| Point::scalar(1.0 / (2.0 * n as f64))).collect();
    let trace = IterationTrace::from_points(&space, pts)?;
    for window in [5, 20, 50] {
        let c = detect_cauchy(&space, &trace, window, 1e-6)?;
        println!(
            "window {window:>2}: estimate {:.9} spread {:.2e} cauchy={} zero-cauchy={}",
            c.limit_estimate, c.spread, c.is_cauchy, c.is_zero_cauchy
        );
    }

    let grid = Sampler::new(0, space.domain().clone()).uniform_grid(1000);
    let cands = limit_candidates(&space, &trace, 20, &grid, 1e-9);
    println!("limit candidates among {} grid points: {}", grid.len(), cands.len());
    println!("p(x, x) = 2 everywhere, so p(x_n, x) -> p(x, x) would force x = 0, which is outside (0,1)");
    Ok(())
}
