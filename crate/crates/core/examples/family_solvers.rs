//! Common fixed points of map families under the Kannan and Chatterjea
//! type displays, with the coefficient gate evaluated before iterating.
//!
//! ```text
//! cargo run --example family_solvers
//! ```

use pmt::fixtures::{e5_deltas, e5_family, get_fixture};
use pmt::series::DeltaMatrix;
use pmt::solvers::{
    per_map_fixed_point_check, solve_family, FamilyConfig, FixedPointReport, Gate, GateReport, PhiFunction, Scheme,
    SolverConfig,
};
use pmt::spaces::{Domain, MapFamily, Oracle, Point, SelfMap, SpaceDescriptor};

fn summary(name: &str, r: &FixedPointReport) {
    let worst = r.residuals.values().copied().fold(0.0, f64::max);
    let gate = match &r.gate {
        Some(GateReport::AlphaSeries(c)) => format!("alpha-series λ={:.4} n={}", c.lambda, c.n_lambda),
        Some(GateReport::RelaxedCn(c)) => format!("relaxed limsup={:.4} ΣC_n≈{:.4}", c.worst_limsup, c.cn_partial_sum),
        None => "none".into(),
    };
    println!(
        "{name}\n  x*={} steps={} worst probe residual={worst:.2e}\n  gate: {gate}\n  failed: {:?}",
        r.point,
        r.trace.steps(),
        r.failed_checks
    );
}

fn main() -> pmt::Result<()> {
    // The catalog's geometric family: T_i = x/16^i with F = sqrt.
    let e3 = get_fixture("E3-kannan-family")?;
    let run = e3.scheme_config.as_ref().expect("E3 carries a family");
    let r = solve_family(&e3.space, e3.maps.as_ref().unwrap(), &run.config, &run.x0, &run.solver)?;
    summary("x/16^i, three-term Kannan display", &r);

    // Halving maps with a constant coefficient.
    let abs = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).complete(true).build()?;
    let halving = MapFamily::new("x/2^n", |n| SelfMap::divide_by(2f64.powi(n as i32)));
    let fam = FamilyConfig::new(DeltaMatrix::constant(0.45), PhiFunction::identity(), Scheme::KannanChoudhury, Gate::relaxed());
    let r = solve_family(&abs, &halving, &fam, &Point::scalar(1.0), &SolverConfig::default())?;
    summary("x/2^n, δ = 0.45", &r);

    // Squared maps: the orbit follows T_n^2 but residuals are also taken on T_n.
    let r = solve_family(&abs, &halving, &fam.clone().with_power(2), &Point::scalar(1.0), &SolverConfig::default())?;
    summary("(x/2^n)^2, δ = 0.45", &r);
    println!("  original-map residuals: {}", r.original_residuals.map_or(0, |m| m.len()));

    // A coefficient of 0.9 fails the gate, so nothing is iterated.
    let bad = FamilyConfig::new(DeltaMatrix::constant(0.9), PhiFunction::identity(), Scheme::KannanChoudhury, Gate::relaxed());
    if let Err(e) = solve_family(&abs, &halving, &bad, &Point::scalar(1.0), &SolverConfig::default()) {
        println!("δ = 0.9 rejected: {e}");
    }

    // Discontinuous maps that share the fixed point 1.
    let fam = FamilyConfig::new(e5_deltas(), PhiFunction::identity(), Scheme::Chatterjea, Gate::RelaxedCn { horizon: 200 });
    let family = e5_family();
    let r = solve_family(&abs, &family, &fam, &Point::scalar(0.0), &SolverConfig::default())?;
    summary("2/3 + 1/(n+2) at 0, 1 elsewhere; Chatterjea display", &r);
    let verdicts = per_map_fixed_point_check(&abs, &family, &fam.deltas, &r, |n| n + 1, &[1, 2, 5, 10], 1000, 1e-9)?;
    for v in verdicts {
        println!("  T_{}: δ={:.4} {:?}", v.n, v.delta, v.status);
    }
    Ok(())
}
