use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{residual, run_orbit, verify_bound, Assumptions, FixedPointReport, HypothesisLog, SolverConfig, StepCheck};
use crate::error::{Error, Result};
use crate::spaces::{Point, SelfMap, SpaceDescriptor};

type PairEval = dyn Fn(&Point, &Point) -> f64 + Send + Sync;

/// A non-negative function of two points.
#[derive(Clone)]
pub struct PairFn {
    label: String,
    f: Arc<PairEval>,
}

impl PairFn {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    {
        PairFn {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(v: f64) -> Self {
        PairFn::new(format!("{v}"), move |_, _| v)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        (self.f)(x, y)
    }
}

impl fmt::Debug for PairFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairFn").field("label", &self.label).finish()
    }
}

/// Weights `α, β` with the bounds `C_α, C_β` they must propagate along
/// the orbit.
#[derive(Clone, Debug)]
pub struct AdmissibilityConfig {
    pub alpha: PairFn,
    pub beta: PairFn,
    pub c_alpha: f64,
    pub c_beta: f64,
}

impl AdmissibilityConfig {
    pub fn constant(alpha: f64, beta: f64, c_alpha: f64, c_beta: f64) -> Self {
        AdmissibilityConfig {
            alpha: PairFn::constant(alpha),
            beta: PairFn::constant(beta),
            c_alpha,
            c_beta,
        }
    }

    /// Effective contraction rate `C_β / C_α`, which must stay below `1/K`.
    pub fn rate(&self) -> f64 {
        self.c_beta / self.c_alpha
    }

    fn validate(&self, k: f64) -> Result<()> {
        if !(self.c_alpha > 0.0 && self.c_beta >= 0.0) {
            return Err(Error::rejected("need C_alpha > 0 and C_beta >= 0"));
        }
        if self.rate() >= 1.0 / k {
            return Err(Error::rejected(format!(
                "C_beta / C_alpha = {} must be below 1/K = {}",
                self.rate(),
                1.0 / k
            )));
        }
        Ok(())
    }
}

/// Fixed point of `f` under `α(x,y) p(fx,fy) <= β(x,y) p(x,y)` by the
/// Picard orbit `x_{n+1} = f x_n`.
///
/// The starting point must satisfy `α(x_0, f x_0) >= C_α` and
/// `β(x_0, f x_0) <= C_β`. Along the orbit each step checks that both
/// bounds still hold on consecutive iterates and that the weighted
/// inequality holds on the previous pair; the reported slack is the
/// smallest of the three.
pub fn solve_admissible(
    space: &SpaceDescriptor,
    f: &SelfMap,
    cfg_adm: &AdmissibilityConfig,
    x0: &Point,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    cfg_adm.validate(space.coeff_k())?;
    space.domain().check(x0)?;
    let fx0 = f.apply(x0);
    let (a0, b0) = (cfg_adm.alpha.eval(x0, &fx0), cfg_adm.beta.eval(x0, &fx0));
    if a0 < cfg_adm.c_alpha || b0 > cfg_adm.c_beta {
        return Err(Error::rejected(format!(
            "starting point is not admissible: α(x0, f x0) = {a0}, β(x0, f x0) = {b0}"
        )));
    }

    let (ca, cb) = (cfg_adm.c_alpha, cfg_adm.c_beta);
    let mut log = HypothesisLog::new(format!(
        "α(x,y) p(fx,fy) <= β(x,y) p(x,y), α >= {ca}, β <= {cb} on consecutive iterates"
    ));
    let trace = run_orbit(
        space,
        x0,
        cfg,
        &mut log,
        |_| Ok(f.clone()),
        |t, pts| {
            let (prev, cur) = (&pts[t - 1], &pts[t]);
            let a = cfg_adm.alpha.eval(prev, cur);
            let b = cfg_adm.beta.eval(prev, cur);
            // Each candidate is (lhs, rhs, x, y); the binding one is reported.
            let mut cands = vec![(ca, a, prev, cur), (b, cb, prev, cur)];
            if t >= 2 {
                let (x, y) = (&pts[t - 2], &pts[t - 1]);
                let aw = cfg_adm.alpha.eval(x, y);
                let bw = cfg_adm.beta.eval(x, y);
                cands.push((aw * space.raw(y, cur), bw * space.raw(x, y), x, y));
            }
            let (lhs, rhs, x, y) = cands
                .into_iter()
                .min_by(|p, q| (p.1 - p.0).total_cmp(&(q.1 - q.0)))
                .expect("non-empty");
            StepCheck::Checked {
                lhs,
                rhs,
                x: x.clone(),
                y: y.clone(),
            }
        },
    )?;

    let x_star = trace.last().clone();
    // |p(x_n, x*) - p(x*, x*)| at the last iterate before x*.
    let own = space.raw(&x_star, &x_star);
    let n = trace.iterates.len();
    let limit_residual = if n >= 2 {
        (space.raw(&trace.iterates[n - 2], &x_star) - own).abs()
    } else {
        0.0
    };

    let rate = cfg_adm.rate();
    let bound_check = match trace.step_dist.first() {
        Some(seed) => Some(verify_bound(space, &trace, space.coeff_k(), rate, *seed, cfg.tol)?),
        None => None,
    };
    let mut assumptions = Assumptions::of(space);
    assumptions
        .notes
        .push("the limit is taken as the final iterate; continuity of f and the Hausdorff property are assumed".into());
    let residuals = BTreeMap::from([(format!("f = {}", f.label()), residual(space, f, &x_star))]);
    let parameters = BTreeMap::from([
        ("K".to_string(), space.coeff_k()),
        ("C_alpha".to_string(), ca),
        ("C_beta".to_string(), cb),
        ("rate".to_string(), rate),
    ]);
    let mut report = FixedPointReport {
        solver: "admissible".into(),
        point: x_star,
        residuals,
        trace,
        bound_check,
        hypothesis_log: log,
        assumptions,
        original_residuals: None,
        uniqueness: None,
        gate: None,
        limit_residual: Some(limit_residual),
        parameters,
        failed_checks: Vec::new(),
    };
    report.settle(cfg.residual_tol, cfg.tol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::StopReason;
    use super::*;
    use crate::spaces::{Domain, Oracle};

    fn metric() -> SpaceDescriptor {
        SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).build().unwrap()
    }

    #[test]
    fn quarter_map() {
        let adm = AdmissibilityConfig::constant(1.0, 0.5, 1.0, 0.5);
        let r = solve_admissible(&metric(), &SelfMap::divide_by(4.0), &adm, &Point::scalar(1.0), &SolverConfig::default())
            .unwrap();
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);
        assert!(r.point.x() < 1e-10);
    }

    #[test]
    fn identity_at_a_fixed_point() {
        let adm = AdmissibilityConfig::constant(1.0, 0.0, 1.0, 0.0);
        let r = solve_admissible(&metric(), &SelfMap::identity(), &adm, &Point::scalar(0.3), &SolverConfig::default())
            .unwrap();
        assert!(r.converged());
        assert_eq!(r.trace.step_dist, vec![0.0]);
        assert_eq!(r.point.x(), 0.3);
    }

    #[test]
    fn weights_two_and_half() {
        let adm = AdmissibilityConfig::constant(2.0, 0.5, 2.0, 0.5);
        // f = x/2 gives α p(fx,fy) = |x-y| > β p(x,y) = |x-y|/2.
        let r = solve_admissible(&metric(), &SelfMap::divide_by(2.0), &adm, &Point::scalar(1.0), &SolverConfig::default())
            .unwrap();
        assert_eq!(r.trace.stop_reason, StopReason::HypothesisViolated);
        // f = x/8 satisfies it, and the rate 1/4 bound holds.
        let r = solve_admissible(&metric(), &SelfMap::divide_by(8.0), &adm, &Point::scalar(1.0), &SolverConfig::default())
            .unwrap();
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);
        assert_eq!(r.parameters["rate"], 0.25);
    }

    #[test]
    fn preconditions() {
        let adm = AdmissibilityConfig::constant(1.0, 1.0, 1.0, 1.0);
        assert!(solve_admissible(&metric(), &SelfMap::identity(), &adm, &Point::scalar(0.5), &SolverConfig::default())
            .is_err());
        let adm = AdmissibilityConfig::constant(0.5, 0.1, 1.0, 0.2);
        assert!(solve_admissible(&metric(), &SelfMap::identity(), &adm, &Point::scalar(0.5), &SolverConfig::default())
            .is_err());
    }
}
