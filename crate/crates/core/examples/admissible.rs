//! Weighted contractions `α(x,y) p(fx,fy) <= β(x,y) p(x,y)`.
//!
//! ```text
//! cargo run --example admissible
//! ```

use pmt::solvers::{solve_admissible, AdmissibilityConfig, PairFn, SolverConfig};
use pmt::spaces::{Domain, Oracle, Point, SelfMap, SpaceDescriptor};

fn main() -> pmt::Result<()> {
    let space = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).complete(true).build()?;
    let cfg = SolverConfig::default();
    let x0 = Point::scalar(1.0);

    let adm = AdmissibilityConfig::constant(2.0, 0.5, 2.0, 0.5);
    for d in [2.0, 8.0] {
        let r = solve_admissible(&space, &SelfMap::divide_by(d), &adm, &x0, &cfg)?;
        println!(
            "x/{d}: stop={:?} x*={:.3e} failed={:?}",
            r.trace.stop_reason,
            r.point.x(),
            r.failed_checks
        );
        if let Some(w) = &r.hypothesis_log.witness {
            println!("  violated at step {}: lhs={} rhs={}", w.step, w.lhs, w.rhs);
        }
    }

    // Weights that depend on the points: α grows near zero, β stays flat.
    let alpha = PairFn::new("1 + 1/(1 + x + y)", |x: &Point, y: &Point| 1.0 + 1.0 / (1.0 + x.x() + y.x()));
    let adm = AdmissibilityConfig {
        alpha,
        beta: PairFn::constant(0.5),
        c_alpha: 1.0,
        c_beta: 0.5,
    };
    let r = solve_admissible(&space, &SelfMap::divide_by(5.0), &adm, &x0, &cfg)?;
    println!(
        "x/5 with α = {}: converged={} x*={:.3e} rate={}",
        adm.alpha.label(),
        r.converged(),
        r.point.x(),
        r.parameters["rate"]
    );
    Ok(())
}
