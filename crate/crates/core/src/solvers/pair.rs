use std::collections::BTreeMap;

use super::{
    iterate_power, residual, run_orbit, uniqueness_probe, verify_bound, Assumptions, FixedPointReport,
    HypothesisLog, SolverConfig, StepCheck,
};
use crate::error::{Error, Result};
use crate::spaces::{Point, SelfMap, SpaceDescriptor};

/// Which map produces `x_t` in the alternating orbit: `T1` on odd steps.
fn pair_map(t: usize, t1: &SelfMap, t2: &SelfMap) -> SelfMap {
    if t % 2 == 1 {
        t1.clone()
    } else {
        t2.clone()
    }
}

/// The points `(x, y)` with `T1 x` and `T2 y` the last two iterates,
/// in that order, for the step producing `x_t` (`t >= 2`).
fn pair_arguments(t: usize, pts: &[Point]) -> (&Point, &Point, &Point, &Point) {
    if t % 2 == 1 {
        // x_t = T1 x_{t-1}, x_{t-1} = T2 x_{t-2}
        (&pts[t - 1], &pts[t - 2], &pts[t], &pts[t - 1])
    } else {
        // x_{t-1} = T1 x_{t-2}, x_t = T2 x_{t-1}
        (&pts[t - 2], &pts[t - 1], &pts[t - 1], &pts[t])
    }
}

fn assumptions(space: &SpaceDescriptor) -> Assumptions {
    let mut a = Assumptions::of(space);
    if !space.complete_asserted() {
        a.notes
            .push("completeness is not asserted for this space; convergence evidence is orbit-level only".into());
    }
    a
}

#[allow(clippy::too_many_arguments)]
fn finish_pair(
    solver: &str,
    space: &SpaceDescriptor,
    t1: &SelfMap,
    t2: &SelfMap,
    trace: super::IterationTrace,
    log: HypothesisLog,
    rate: f64,
    mut parameters: BTreeMap<String, f64>,
    mut assumptions: Assumptions,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    let x_star = trace.last().clone();
    let mut residuals = BTreeMap::new();
    residuals.insert(format!("T1 = {}", t1.label()), residual(space, t1, &x_star));
    residuals.insert(format!("T2 = {}", t2.label()), residual(space, t2, &x_star));
    let bound_check = match trace.step_dist.first() {
        Some(seed) => Some(verify_bound(space, &trace, space.coeff_k(), rate, *seed, cfg.tol)?),
        None => None,
    };
    let uniqueness = trace.converged.then(|| uniqueness_probe(space, &[t1, t2], &x_star, cfg));
    parameters.insert("K".into(), space.coeff_k());
    if !trace.converged {
        assumptions.notes.push(format!("stopped: {:?}", trace.stop_reason));
    }
    let mut report = FixedPointReport {
        solver: solver.into(),
        point: x_star,
        residuals,
        trace,
        bound_check,
        hypothesis_log: log,
        assumptions,
        original_residuals: None,
        uniqueness,
        gate: None,
        limit_residual: None,
        parameters,
        failed_checks: Vec::new(),
    };
    report.settle(cfg.residual_tol, cfg.tol);
    Ok(report)
}

/// Common fixed point of `T1, T2` with `p(T1 x, T2 y) <= k p(x, y)`, by the
/// alternating orbit `x_{2n+1} = T1 x_{2n}`, `x_{2n+2} = T2 x_{2n+1}`.
///
/// The inequality is checked at each step on the two orbit points whose
/// images are the last two iterates. The bound check compares the orbit
/// with `K k^t / (1 - k) p(x_0, x_1)`.
pub fn solve_pair_banach(
    space: &SpaceDescriptor,
    t1: &SelfMap,
    t2: &SelfMap,
    k: f64,
    x0: &Point,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::rejected(format!("contraction constant k = {k} must lie in [0, 1)")));
    }
    let mut log = HypothesisLog::new(format!("p(T1 x, T2 y) <= {k} p(x, y)"));
    let trace = run_orbit(space, x0, cfg, &mut log, |t| Ok(pair_map(t, t1, t2)), |t, pts| {
        if t < 2 {
            return StepCheck::Skipped;
        }
        let (x, y, t1x, t2y) = pair_arguments(t, pts);
        StepCheck::Checked {
            lhs: space.raw(t1x, t2y),
            rhs: k * space.raw(x, y),
            x: x.clone(),
            y: y.clone(),
        }
    })?;
    let params = BTreeMap::from([("k".to_string(), k)]);
    finish_pair("banach-pair", space, t1, t2, trace, log, k, params, assumptions(space), cfg)
}

/// [`solve_pair_banach`] on `T1^r1` and `T2^r2`. Residuals against the
/// original maps are reported separately.
#[allow(clippy::too_many_arguments)]
pub fn solve_pair_power(
    space: &SpaceDescriptor,
    t1: &SelfMap,
    t2: &SelfMap,
    r1: u32,
    r2: u32,
    k: f64,
    x0: &Point,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    let c1 = iterate_power(t1, r1)?;
    let c2 = iterate_power(t2, r2)?;
    let mut report = solve_pair_banach(space, &c1, &c2, k, x0, cfg)?;
    report.solver = "power-pair".into();
    report.parameters.insert("r1".into(), r1 as f64);
    report.parameters.insert("r2".into(), r2 as f64);
    report
        .assumptions
        .notes
        .push(format!("iterated the composed maps {} and {}", c1.label(), c2.label()));
    let mut original = BTreeMap::new();
    original.insert(format!("T1 = {}", t1.label()), residual(space, t1, &report.point));
    original.insert(format!("T2 = {}", t2.label()), residual(space, t2, &report.point));
    report.original_residuals = Some(original);
    report.settle(cfg.residual_tol, cfg.tol);
    Ok(report)
}

/// Common fixed point of `T1, T2` with
/// `p(T1 x, T2 y) <= k [p(T1 x, x) + p(y, T2 y)]`, on the alternating orbit.
///
/// Requires `k < min(1/K, 1/2)`. Successive step distances then shrink by
/// `h = k / (1 - k) < 1`, which drives the bound check.
pub fn solve_pair_kannan(
    space: &SpaceDescriptor,
    t1: &SelfMap,
    t2: &SelfMap,
    k: f64,
    x0: &Point,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    let limit = (1.0 / space.coeff_k()).min(0.5);
    if !(k >= 0.0 && k < limit) {
        return Err(Error::rejected(format!(
            "Kannan constant k = {k} must lie in [0, min(1/K, 1/2)) = [0, {limit})"
        )));
    }
    let h = k / (1.0 - k);
    let mut log = HypothesisLog::new(format!("p(T1 x, T2 y) <= {k} [p(T1 x, x) + p(y, T2 y)]"));
    let trace = run_orbit(space, x0, cfg, &mut log, |t| Ok(pair_map(t, t1, t2)), |t, pts| {
        if t < 2 {
            return StepCheck::Skipped;
        }
        let (x, y, t1x, t2y) = pair_arguments(t, pts);
        StepCheck::Checked {
            lhs: space.raw(t1x, t2y),
            rhs: k * (space.raw(t1x, x) + space.raw(y, t2y)),
            x: x.clone(),
            y: y.clone(),
        }
    })?;
    let params = BTreeMap::from([("k".to_string(), k), ("h".to_string(), h)]);
    let mut assumptions = assumptions(space);
    assumptions
        .notes
        .push(format!("k is required below min(1/K, 1/2) = {limit} so that h = {h} < 1"));
    finish_pair("kannan-pair", space, t1, t2, trace, log, h, params, assumptions, cfg)
}

#[cfg(test)]
mod tests {
    use super::super::StopReason;
    use super::*;
    use crate::spaces::{Domain, Oracle};

    fn metric() -> SpaceDescriptor {
        SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit())
            .complete(true)
            .build()
            .unwrap()
    }

    fn one() -> Point {
        Point::scalar(1.0)
    }

    #[test]
    fn halving_pair() {
        let t = SelfMap::divide_by(2.0);
        let r = solve_pair_banach(&metric(), &t, &t, 0.5, &one(), &SolverConfig::default()).unwrap();
        assert!(r.converged());
        assert!(r.point.x() <= 1e-10);
        for w in r.trace.step_dist.windows(2) {
            assert_eq!(w[1], w[0] / 2.0);
        }
        assert!(r.all_checks_passed(), "{:?}", r.failed_checks);
        assert!(r.bound_check.as_ref().unwrap().satisfied);
        assert!(r.uniqueness.as_ref().unwrap().unique());
    }

    #[test]
    fn quarter_maps_on_max_power_space() {
        let s = SpaceDescriptor::builder(Oracle::max_power_plus_abs_power(2.0), Domain::unit())
            .coefficient(4.0)
            .build()
            .unwrap();
        let t = SelfMap::divide_by(4.0);
        let r = solve_pair_banach(&s, &t, &t, 1.0 / 16.0, &one(), &SolverConfig::default()).unwrap();
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);
        assert!(r.point.x() < 1e-5);
    }

    #[test]
    fn third_and_fifth_need_a_larger_constant() {
        let (t1, t2) = (SelfMap::divide_by(3.0), SelfMap::divide_by(5.0));
        let r = solve_pair_banach(&metric(), &t1, &t2, 1.0 / 3.0, &one(), &SolverConfig::default()).unwrap();
        assert_eq!(r.trace.stop_reason, StopReason::HypothesisViolated);
        let r = solve_pair_banach(&metric(), &t1, &t2, 0.4, &one(), &SolverConfig::default()).unwrap();
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);
        assert!(r.point.x() < 1e-10);
    }

    #[test]
    fn rejects_bad_constants() {
        let t = SelfMap::identity();
        assert!(solve_pair_banach(&metric(), &t, &t, 1.5, &one(), &SolverConfig::default()).is_err());
        assert!(solve_pair_kannan(&metric(), &t, &t, 0.5, &one(), &SolverConfig::default()).is_err());
    }

    #[test]
    fn power_pair() {
        let t = SelfMap::divide_by(2.0);
        let r = solve_pair_power(&metric(), &t, &t, 3, 3, 0.125, &one(), &SolverConfig::default()).unwrap();
        assert_eq!(r.trace.iterates[1].x(), 0.125);
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);

        let (a, b) = (SelfMap::divide_by(2.0), SelfMap::divide_by(3.0));
        let r = solve_pair_power(&metric(), &a, &b, 2, 2, 0.5, &one(), &SolverConfig::default()).unwrap();
        assert!(r.converged() && r.point.x() < 1e-10);

        let plain = solve_pair_banach(&metric(), &t, &t, 0.5, &one(), &SolverConfig::default()).unwrap();
        let same = solve_pair_power(&metric(), &t, &t, 1, 1, 0.5, &one(), &SolverConfig::default()).unwrap();
        assert_eq!(plain.trace, same.trace);
    }

    #[test]
    fn kannan_pair() {
        let t = SelfMap::divide_by(4.0);
        let r = solve_pair_kannan(&metric(), &t, &t, 0.25, &one(), &SolverConfig::default()).unwrap();
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);

        let r = solve_pair_kannan(&metric(), &t, &t, 0.4, &one(), &SolverConfig::default()).unwrap();
        let h = 0.4 / 0.6;
        assert!(r.trace.step_ratios().iter().all(|q| *q <= h + 1e-12));

        let c = SelfMap::constant(Point::scalar(0.3));
        let r = solve_pair_kannan(&metric(), &c, &c, 0.1, &one(), &SolverConfig::default()).unwrap();
        assert!(r.converged());
        assert_eq!(r.point.x(), 0.3);
        assert!(r.residuals.values().all(|v| *v == 0.0));
    }
}
