//! Common fixed points of two maps under Banach, power and Kannan
//! contractions, including a run that stops on a violated hypothesis.
//!
//! ```text
//! cargo run --example pair_solvers
//! ```

use pmt::solvers::{solve_pair_banach, solve_pair_kannan, solve_pair_power, FixedPointReport, SolverConfig};
use pmt::spaces::{Domain, Oracle, Point, SelfMap, SpaceDescriptor};

fn line(name: &str, r: &FixedPointReport) {
    println!(
        "{name:<28} x*={:<12.3e} steps={:<3} stop={:?} failed={:?}",
        r.point.x(),
        r.trace.steps(),
        r.trace.stop_reason,
        r.failed_checks
    );
}

fn main() -> pmt::Result<()> {
    let space = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).complete(true).build()?;
    let cfg = SolverConfig::default();
    let one = Point::scalar(1.0);
    let half = SelfMap::divide_by(2.0);

    let r = solve_pair_banach(&space, &half, &half, 0.5, &one, &cfg)?;
    line("banach x/2, k=1/2", &r);
    if let Some(b) = &r.bound_check {
        println!("  bound holds: {} (worst excess {:.3e})", b.satisfied, b.worst_excess);
    }

    let (t1, t2) = (SelfMap::divide_by(3.0), SelfMap::divide_by(5.0));
    line("banach x/3, x/5, k=1/3", &solve_pair_banach(&space, &t1, &t2, 1.0 / 3.0, &one, &cfg)?);
    line("banach x/3, x/5, k=0.4", &solve_pair_banach(&space, &t1, &t2, 0.4, &one, &cfg)?);

    let r = solve_pair_power(&space, &half, &SelfMap::divide_by(3.0), 2, 2, 0.5, &one, &cfg)?;
    line("power (x/2)^2, (x/3)^2", &r);
    println!("  residuals on the original maps: {:?}", r.original_residuals);

    let r = solve_pair_kannan(&space, &SelfMap::divide_by(4.0), &SelfMap::divide_by(4.0), 0.4, &one, &cfg)?;
    line("kannan x/4, k=0.4", &r);
    let worst = r.trace.step_ratios().into_iter().fold(0.0, f64::max);
    println!("  largest step ratio {worst:.6} against h = {:.6}", 0.4 / 0.6);

    match solve_pair_kannan(&space, &half, &half, 0.5, &one, &cfg) {
        Ok(_) => println!("kannan k=0.5 unexpectedly accepted"),
        Err(e) => println!("kannan k=0.5 rejected: {e}"),
    }
    Ok(())
}
