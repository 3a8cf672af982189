//! Picard-iteration solvers with orbit-level hypothesis checks.
//!
//! Every solver records the full orbit in an [`IterationTrace`] and checks,
//! step by step, the contraction inequality it relies on at exactly the
//! pairs of points the convergence argument uses. A violated inequality
//! stops the run with [`StopReason::HypothesisViolated`].
//!
//! Convergence follows the partial-metric notion: `x_n -> x` means
//! `p(x_n, x) -> p(x, x)`, so residuals compare `p(x*, T x*)` with
//! `p(x*, x*)` rather than with zero.

mod admissible;
mod family;
mod pair;
mod phi;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Point, Sampler, SelfMap, SpaceDescriptor, DEFAULT_TOL};

pub use admissible::{solve_admissible, AdmissibilityConfig, PairFn};
pub use family::{
    per_map_fixed_point_check, solve_family, FamilyConfig, Gate, GateReport, PerMapStatus, PerMapVerdict, Scheme,
    DEFAULT_PROBES,
};
pub use pair::{solve_pair_banach, solve_pair_kannan, solve_pair_power};
pub use phi::{PhiFunction, PsiFunction};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub step_tol: f64,
    pub max_iter: usize,
    /// Slack allowed in hypothesis and bound comparisons.
    pub tol: f64,
    /// Largest accepted fixed-point residual `p(x*, T x*) - p(x*, x*)`.
    pub residual_tol: f64,
    /// Points per axis budget for the uniqueness scan (total, spread over axes).
    pub uniqueness_grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_tol: 1e-10,
            max_iter: 10_000,
            tol: DEFAULT_TOL,
            residual_tol: 1e-8,
            uniqueness_grid: 1000,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step_tol > 0.0 && self.tol >= 0.0 && self.residual_tol >= 0.0) {
            return Err(Error::rejected("tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::rejected("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `p(x_{n-1}, x_n) <= step_tol`.
    StepTol,
    /// The last two iterates coincide, exactly or in the sense that
    /// `p(x_{n-1}, x_n)` matches both self-distances within `step_tol`.
    ResidualTol,
    MaxIter,
    HypothesisViolated,
}

/// The orbit `x_0..x_N` with per-step measurements.
///
/// `step_dist[t-1] = p(x_{t-1}, x_t)` and `hypothesis_slack[t-1]` belong
/// to the step that produced `x_t`; `self_dist[n] = p(x_n, x_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iterates: Vec<Point>,
    pub step_dist: Vec<f64>,
    pub self_dist: Vec<f64>,
    pub hypothesis_slack: Vec<Option<f64>>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    /// A trace over a given sequence, with no hypothesis data. Useful for
    /// diagnosing sequences that do not come from a solver.
    pub fn from_points(space: &SpaceDescriptor, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::rejected("a trace needs at least one point"));
        }
        for p in &points {
            space.domain().check(p)?;
        }
        let step_dist = points.windows(2).map(|w| space.raw(&w[0], &w[1])).collect::<Vec<_>>();
        let self_dist = points.iter().map(|p| space.raw(p, p)).collect();
        let n = step_dist.len();
        Ok(IterationTrace {
            iterates: points,
            step_dist,
            self_dist,
            hypothesis_slack: vec![None; n],
            converged: false,
            stop_reason: StopReason::MaxIter,
        })
    }

    pub fn steps(&self) -> usize {
        self.step_dist.len()
    }

    pub fn last(&self) -> &Point {
        self.iterates.last().expect("trace is never empty")
    }

    /// Ratios `step_dist[t] / step_dist[t-1]` where the denominator is positive.
    pub fn step_ratios(&self) -> Vec<f64> {
        self.step_dist
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// CSV with columns `n, x (or x1..xd), step_dist, self_dist,
    /// hypothesis_slack`. Row `n` holds `x_n`, its self-distance, and the
    /// step distance and slack of the step that produced it (blank on row 0).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.iterates[0].dim();
        let mut header = vec!["n".to_string()];
        if d == 1 {
            header.push("x".into());
        } else {
            header.extend((1..=d).map(|i| format!("x{i}")));
        }
        header.extend(["step_dist", "self_dist", "hypothesis_slack"].map(String::from));
        w.write_record(&header)?;
        for (n, x) in self.iterates.iter().enumerate() {
            let mut row = vec![n.to_string()];
            row.extend(x.coords().iter().map(|c| c.to_string()));
            let (step, slack) = if n == 0 {
                (String::new(), String::new())
            } else {
                (
                    self.step_dist[n - 1].to_string(),
                    self.hypothesis_slack[n - 1].map(|s| s.to_string()).unwrap_or_default(),
                )
            };
            row.push(step);
            row.push(self.self_dist[n].to_string());
            row.push(slack);
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A step at which the contraction inequality failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisWitness {
    pub step: usize,
    pub x: Point,
    pub y: Point,
    pub lhs: f64,
    pub rhs: f64,
}

/// Summary of the orbit-level contraction checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisLog {
    pub display: String,
    pub checked: usize,
    pub skipped: usize,
    pub worst_slack: Option<f64>,
    pub worst_step: Option<usize>,
    pub witness: Option<HypothesisWitness>,
}

impl HypothesisLog {
    fn new(display: impl Into<String>) -> Self {
        HypothesisLog {
            display: display.into(),
            checked: 0,
            skipped: 0,
            worst_slack: None,
            worst_step: None,
            witness: None,
        }
    }

    fn record(&mut self, step: usize, lhs: f64, rhs: f64) -> f64 {
        let slack = rhs - lhs;
        self.checked += 1;
        if self.worst_slack.is_none_or(|w| slack < w) {
            self.worst_slack = Some(slack);
            self.worst_step = Some(step);
        }
        slack
    }

    pub fn violated(&self) -> bool {
        self.witness.is_some()
    }
}

/// Observed orbit quantities against a theoretical curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub description: String,
    pub theoretical: Vec<f64>,
    pub empirical: Vec<f64>,
    pub satisfied: bool,
    pub worst_index: Option<usize>,
    pub worst_excess: f64,
}

impl BoundCheck {
    fn compare(description: String, theoretical: Vec<f64>, empirical: Vec<f64>, tol: f64) -> Self {
        let mut worst_index = None;
        let mut worst_excess = f64::NEG_INFINITY;
        for (i, (t, e)) in theoretical.iter().zip(&empirical).enumerate() {
            let excess = e - t;
            if excess > worst_excess || worst_index.is_none() {
                worst_excess = excess;
                worst_index = Some(i);
            }
        }
        BoundCheck {
            description,
            satisfied: worst_excess <= tol,
            theoretical,
            empirical,
            worst_index,
            worst_excess: if worst_index.is_some() { worst_excess } else { 0.0 },
        }
    }
}

/// Properties of the space that sampling cannot establish, echoed from the
/// descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assumptions {
    pub complete: bool,
    pub hausdorff: bool,
    pub notes: Vec<String>,
}

impl Assumptions {
    fn of(space: &SpaceDescriptor) -> Self {
        Assumptions {
            complete: space.complete_asserted(),
            hausdorff: space.hausdorff_asserted(),
            notes: Vec::new(),
        }
    }
}

/// Points other than `x*` that every checked map leaves in place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessProbe {
    pub grid_points: usize,
    pub other_fixed_points: Vec<Point>,
}

impl UniquenessProbe {
    pub fn unique(&self) -> bool {
        self.other_fixed_points.is_empty()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub solver: String,
    pub point: Point,
    pub residuals: BTreeMap<String, f64>,
    pub trace: IterationTrace,
    pub bound_check: Option<BoundCheck>,
    pub hypothesis_log: HypothesisLog,
    pub assumptions: Assumptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_residuals: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessProbe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_residual: Option<f64>,
    pub parameters: BTreeMap<String, f64>,
    /// Checks that did not hold, by name.
    pub failed_checks: Vec<String>,
}

impl FixedPointReport {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }

    pub fn all_checks_passed(&self) -> bool {
        self.failed_checks.is_empty()
    }

    /// Fills `failed_checks` from the report's contents.
    fn settle(&mut self, residual_tol: f64, tol: f64) {
        let mut failed = Vec::new();
        if self.hypothesis_log.violated() {
            failed.push("hypothesis".to_string());
        }
        if self.trace.converged {
            let all = self.residuals.iter().chain(self.original_residuals.iter().flatten());
            for (label, r) in all {
                if !(*r <= residual_tol && *r >= -tol) {
                    failed.push(format!("residual {label}"));
                }
            }
            if self.uniqueness.as_ref().is_some_and(|u| !u.unique()) {
                failed.push("uniqueness".into());
            }
            if self.limit_residual.is_some_and(|r| r > residual_tol) {
                failed.push("limit".into());
            }
        }
        if self.bound_check.as_ref().is_some_and(|b| !b.satisfied) {
            failed.push("bound".into());
        }
        failed.dedup();
        self.failed_checks = failed;
    }
}

/// `r`-fold composition of a map.
pub fn iterate_power(t: &SelfMap, r: u32) -> Result<SelfMap> {
    if r == 0 {
        return Err(Error::rejected("iterate power r must be at least 1"));
    }
    if r == 1 {
        return Ok(t.clone());
    }
    let inner = t.clone();
    let label = format!("({})^{r}", t.label());
    Ok(SelfMap::new(label, move |x: &Point| {
        let mut y = inner.apply(x);
        for _ in 1..r {
            y = inner.apply(&y);
        }
        y
    }))
}

/// `p(x*, T x*) - p(x*, x*)`.
pub fn residual(space: &SpaceDescriptor, map: &SelfMap, x: &Point) -> f64 {
    space.raw(x, &map.apply(x)) - space.raw(x, x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub window: usize,
    pub pairs: usize,
    pub limit_estimate: f64,
    pub spread: f64,
    pub is_cauchy: bool,
    pub is_zero_cauchy: bool,
}

/// Examines `p(x_n, x_m)` over all pairs `n < m` of the last `window`
/// iterates. The estimate is their mean; the verdict is Cauchy when their
/// spread is within `tol`, and 0-Cauchy when the estimate is within `tol`
/// of zero.
pub fn detect_cauchy(space: &SpaceDescriptor, trace: &IterationTrace, window: usize, tol: f64) -> Result<CauchyReport> {
    if window < 2 {
        return Err(Error::rejected("window must be at least 2"));
    }
    if trace.iterates.len() <= 2 * window {
        return Err(Error::rejected(format!(
            "trace of {} points is too short for a window of {window}",
            trace.iterates.len()
        )));
    }
    let tail = &trace.iterates[trace.iterates.len() - window..];
    let mut values = Vec::with_capacity(window * (window - 1) / 2);
    for (a, x) in tail.iter().enumerate() {
        for y in &tail[a + 1..] {
            values.push(space.raw(x, y));
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    Ok(CauchyReport {
        window,
        pairs: values.len(),
        limit_estimate: mean,
        spread,
        is_cauchy: spread <= tol,
        is_zero_cauchy: mean.abs() <= tol,
    })
}

/// Grid points `x` with `|p(x_m, x) - p(x, x)| <= tol` for every `x_m`
/// in the last `window` iterates: candidates for a limit of the trace.
pub fn limit_candidates(
    space: &SpaceDescriptor,
    trace: &IterationTrace,
    window: usize,
    grid: &[Point],
    tol: f64,
) -> Vec<Point> {
    let start = trace.iterates.len().saturating_sub(window);
    let tail = &trace.iterates[start..];
    grid.iter()
        .filter(|x| {
            let own = space.raw(x, x);
            tail.iter().all(|xm| (space.raw(xm, x) - own).abs() <= tol)
        })
        .cloned()
        .collect()
}

/// Compares `max_{m > t} p(x_t, x_m)` with `K rate^t / (1 - rate) seed_dist`
/// at every index `t` of the trace.
///
/// On the even iterates `t = 2n` this is the geometric tail bound
/// `K k^{2n} / (1 - k) p(x_1, x_0)`.
pub fn verify_bound(
    space: &SpaceDescriptor,
    trace: &IterationTrace,
    k: f64,
    rate: f64,
    seed_dist: f64,
    tol: f64,
) -> Result<BoundCheck> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::rejected(format!("rate {rate} must lie in [0, 1)")));
    }
    let pts = &trace.iterates;
    let n = pts.len().saturating_sub(1);
    let mut theoretical = Vec::with_capacity(n);
    let mut empirical = Vec::with_capacity(n);
    let scale = k * seed_dist / (1.0 - rate);
    let mut power = 1.0;
    for t in 0..n {
        theoretical.push(scale * power);
        power *= rate;
        let observed = pts[t + 1..]
            .iter()
            .map(|xm| space.raw(&pts[t], xm))
            .fold(f64::NEG_INFINITY, f64::max);
        empirical.push(observed);
    }
    Ok(BoundCheck::compare(
        format!("max_(m>t) p(x_t,x_m) <= {k} * {rate}^t / (1 - {rate}) * {seed_dist}"),
        theoretical,
        empirical,
        tol,
    ))
}

/// Evenly spread probe points, about `total` of them, over the space's domain.
fn probe_grid(space: &SpaceDescriptor, total: usize) -> Vec<Point> {
    let d = space.dim() as f64;
    let per_axis = (total as f64).powf(1.0 / d).round().max(2.0) as usize;
    Sampler::new(0, space.domain().clone()).uniform_grid(per_axis)
}

/// Grid points away from `x*` that every map in `maps` fixes within `tol`,
/// measured by residuals in both directions.
fn uniqueness_probe(
    space: &SpaceDescriptor,
    maps: &[&SelfMap],
    x_star: &Point,
    cfg: &SolverConfig,
) -> UniquenessProbe {
    let grid = probe_grid(space, cfg.uniqueness_grid);
    let others = grid
        .iter()
        .filter(|y| {
            let dp = if *y == x_star { 0.0 } else { space.raw(y, x_star) };
            dp > 10.0 * cfg.tol
                && maps.iter().all(|m| {
                    let ty = m.apply(y);
                    let own = space.raw(y, y);
                    (space.raw(y, &ty) - own).abs() <= cfg.tol && (space.raw(&ty, &ty) - own).abs() <= cfg.tol
                })
        })
        .take(10)
        .cloned()
        .collect();
    UniquenessProbe {
        grid_points: grid.len(),
        other_fixed_points: others,
    }
}

/// Outcome of one step of the shared Picard loop.
enum StepCheck {
    Skipped,
    Checked { lhs: f64, rhs: f64, x: Point, y: Point },
}

/// Shared Picard loop. `map_at(t)` gives the map producing `x_t` and
/// `check(t, points)` evaluates the hypothesis for that step once `x_t`
/// has been appended.
fn run_orbit<M, C>(
    space: &SpaceDescriptor,
    x0: &Point,
    cfg: &SolverConfig,
    log: &mut HypothesisLog,
    mut map_at: M,
    mut check: C,
) -> Result<IterationTrace>
where
    M: FnMut(usize) -> Result<SelfMap>,
    C: FnMut(usize, &[Point]) -> StepCheck,
{
    cfg.validate()?;
    space.domain().check(x0)?;
    let mut iterates = vec![x0.clone()];
    let mut step_dist = Vec::new();
    let mut self_dist = vec![space.raw(x0, x0)];
    let mut slacks = Vec::new();
    let mut stop = StopReason::MaxIter;

    for t in 1..=cfg.max_iter {
        let map = map_at(t)?;
        let prev = &iterates[t - 1];
        let next = map.apply(prev);
        if !space.domain().contains(&next) {
            return Err(Error::rejected(format!(
                "map {} sends x_{} = {prev} to {next}, outside the domain",
                map.label(),
                t - 1
            )));
        }
        let step = space.raw(prev, &next);
        let own = space.raw(&next, &next);
        if !(step.is_finite() && own.is_finite()) {
            return Err(Error::Internal(format!("non-finite distance at step {t}")));
        }
        let same = *prev == next;
        let close = (step - own).abs() <= cfg.step_tol && (step - self_dist[t - 1]).abs() <= cfg.step_tol;
        iterates.push(next);
        step_dist.push(step);
        self_dist.push(own);

        let slack = match check(t, &iterates) {
            StepCheck::Skipped => {
                log.skipped += 1;
                None
            }
            StepCheck::Checked { lhs, rhs, x, y } => {
                let s = log.record(t, lhs, rhs);
                if s < -cfg.tol && log.witness.is_none() {
                    log.witness = Some(HypothesisWitness { step: t, x, y, lhs, rhs });
                }
                Some(s)
            }
        };
        slacks.push(slack);
        if log.violated() {
            stop = StopReason::HypothesisViolated;
            break;
        }
        if step <= cfg.step_tol {
            stop = StopReason::StepTol;
            break;
        }
        if same || close {
            stop = StopReason::ResidualTol;
            break;
        }
    }
    Ok(IterationTrace {
        converged: matches!(stop, StopReason::StepTol | StopReason::ResidualTol),
        iterates,
        step_dist,
        self_dist,
        hypothesis_slack: slacks,
        stop_reason: stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Domain, Oracle};

    fn e2() -> SpaceDescriptor {
        SpaceDescriptor::builder(
            Oracle::Sum(vec![Oracle::pow(Oracle::AbsDiff, 2.0), Oracle::Const(2.0)]),
            Domain::open(0.0, 1.0).unwrap(),
        )
        .coefficient(2.0)
        .build()
        .unwrap()
    }

    #[test]
    fn cauchy_on_shrinking_sequence_in_shifted_square() {
        let s = e2();
        let pts = (1..=200).map(|n| Point::scalar(1.0 / (2.0 * n as f64))).collect();
        let trace = IterationTrace::from_points(&s, pts).unwrap();
        let r = detect_cauchy(&s, &trace, 20, 1e-6).unwrap();
        assert!((r.limit_estimate - 2.0).abs() <= 1e-6);
        assert!(!r.is_zero_cauchy);
        assert!(r.is_cauchy);
        assert!(detect_cauchy(&s, &trace, 150, 1e-6).is_err());
        let grid = Sampler::new(0, s.domain().clone()).uniform_grid(1000);
        assert!(limit_candidates(&s, &trace, 20, &grid, 1e-9).is_empty());
    }

    #[test]
    fn constant_trace_is_zero_cauchy() {
        let s = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).build().unwrap();
        let trace = IterationTrace::from_points(&s, vec![Point::scalar(0.3); 10]).unwrap();
        let r = detect_cauchy(&s, &trace, 4, 1e-9).unwrap();
        assert_eq!(r.limit_estimate, 0.0);
        assert!(r.is_zero_cauchy);
        let b = verify_bound(&s, &trace, 1.0, 0.5, 0.1, 1e-12).unwrap();
        assert!(b.satisfied);
        assert!(verify_bound(&s, &trace, 1.0, 1.0, 0.1, 1e-12).is_err());
    }

    #[test]
    fn powers_compose() {
        let t = SelfMap::divide_by(2.0);
        let t3 = iterate_power(&t, 3).unwrap();
        assert_eq!(t3.apply(&Point::scalar(1.0)).x(), 0.125);
        assert_eq!(iterate_power(&t, 1).unwrap().apply(&Point::scalar(0.3)).x(), 0.15);
        assert!(iterate_power(&t, 0).is_err());
        let t2 = SelfMap::divide_by(256.0);
        assert_eq!(iterate_power(&t2, 2).unwrap().apply(&Point::scalar(1.0)).x(), 1.0 / 65536.0);
    }

    #[test]
    fn trace_csv_layout() {
        let s = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).build().unwrap();
        let trace = IterationTrace::from_points(&s, vec![Point::scalar(1.0), Point::scalar(0.5)]).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "n,x,step_dist,self_dist,hypothesis_slack\n0,1,,0,\n1,0.5,0.5,0,\n");
    }
}
