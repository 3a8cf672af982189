use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::phi::{PhiFunction, PsiFunction};
use super::{
    iterate_power, probe_grid, residual, run_orbit, Assumptions, BoundCheck, FixedPointReport, HypothesisLog,
    SolverConfig, StepCheck,
};
use crate::error::{Error, Result};
use crate::series::{
    certify_alpha_series, check_relaxed_hypotheses, kannan_rate_terms, AlphaSeriesCertificate, DeltaMatrix,
    RelaxedReport, DEFAULT_GRID,
};
use crate::spaces::{MapFamily, Point, SelfMap, SpaceDescriptor};

/// Map indices probed for common-fixed-point residuals.
pub const DEFAULT_PROBES: [u64; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 17, 103];

/// Right-hand side of the contraction display for a pair `(x, y)` and
/// maps `(T_i, T_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `δ [p(x, T_i x) + p(y, T_j y)]`
    KannanChoudhury,
    /// `δ [p(x, T_i x) + p(y, T_j y) + p(x, y)]`
    KannanChoudhury3,
    /// `δ [p(x, T_j y) + p(y, T_i x)]`
    Chatterjea,
    /// `δ [p(x, T_j y) + p(y, T_i x) + p(x, y)]`
    Chatterjea3,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::KannanChoudhury => "kannan-choudhury",
            Scheme::KannanChoudhury3 => "kannan-choudhury3",
            Scheme::Chatterjea => "chatterjea",
            Scheme::Chatterjea3 => "chatterjea3",
        }
    }

    /// Number of distances inside the bracket, which is also the arity ψ must have.
    pub fn arity(self) -> usize {
        match self {
            Scheme::KannanChoudhury | Scheme::Chatterjea => 2,
            Scheme::KannanChoudhury3 | Scheme::Chatterjea3 => 3,
        }
    }

    fn display(self) -> &'static str {
        match self {
            Scheme::KannanChoudhury => "p(x,T_i x) + p(y,T_j y)",
            Scheme::KannanChoudhury3 => "p(x,T_i x) + p(y,T_j y) + p(x,y)",
            Scheme::Chatterjea => "p(x,T_j y) + p(y,T_i x)",
            Scheme::Chatterjea3 => "p(x,T_j y) + p(y,T_i x) + p(x,y)",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kannan-choudhury" | "kc" => Ok(Scheme::KannanChoudhury),
            "kannan-choudhury3" | "kc3" => Ok(Scheme::KannanChoudhury3),
            "chatterjea" => Ok(Scheme::Chatterjea),
            "chatterjea3" => Ok(Scheme::Chatterjea3),
            other => Err(Error::rejected(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Condition on the coefficients that must hold before iterating.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Gate {
    /// The rate terms form an α-series over `horizon` indices.
    AlphaSeries {
        with_2s_factor: bool,
        grid: Vec<f64>,
        horizon: usize,
    },
    /// `limsup_i δ_{i,j}^s < 1` for each `j` and `Σ C_n < ∞`.
    RelaxedCn { horizon: usize },
}

impl Gate {
    pub fn alpha_series(with_2s_factor: bool) -> Self {
        Gate::AlphaSeries {
            with_2s_factor,
            grid: DEFAULT_GRID.to_vec(),
            horizon: 10_000,
        }
    }

    pub fn relaxed() -> Self {
        Gate::RelaxedCn { horizon: 1000 }
    }

    /// Whether the product bound includes the `2^s` factor.
    fn with_2s_factor(&self) -> bool {
        matches!(self, Gate::AlphaSeries { with_2s_factor: true, .. })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateReport {
    AlphaSeries(AlphaSeriesCertificate),
    RelaxedCn(RelaxedReport),
}

impl GateReport {
    pub fn passed(&self) -> bool {
        match self {
            GateReport::AlphaSeries(c) => c.is_certified(),
            GateReport::RelaxedCn(r) => r.passed(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FamilyConfig {
    pub deltas: DeltaMatrix,
    /// `γ_{i,j}` with `ψ`; absent means `γ ≡ 0`.
    pub gamma: Option<(DeltaMatrix, PsiFunction)>,
    pub phi: PhiFunction,
    pub scheme: Scheme,
    pub gate: Gate,
    pub r: u32,
    pub probes: Vec<u64>,
}

impl FamilyConfig {
    pub fn new(deltas: DeltaMatrix, phi: PhiFunction, scheme: Scheme, gate: Gate) -> Self {
        FamilyConfig {
            deltas,
            gamma: None,
            phi,
            scheme,
            gate,
            r: 1,
            probes: DEFAULT_PROBES.to_vec(),
        }
    }

    pub fn with_gamma(mut self, gamma: DeltaMatrix, psi: PsiFunction) -> Self {
        self.gamma = Some((gamma, psi));
        self
    }

    pub fn with_power(mut self, r: u32) -> Self {
        self.r = r;
        self
    }

    pub fn with_probes(mut self, probes: Vec<u64>) -> Self {
        self.probes = probes;
        self
    }

    fn evaluate_gate(&self) -> Result<GateReport> {
        let s = self.phi.degree();
        match &self.gate {
            Gate::AlphaSeries {
                with_2s_factor,
                grid,
                horizon,
            } => {
                let deltas = self.deltas.superdiagonal(*horizon);
                check_deltas(&deltas.iter().map(|d| d.value()).collect::<Vec<_>>())?;
                let seq = kannan_rate_terms(&deltas, s, *with_2s_factor)?;
                Ok(GateReport::AlphaSeries(certify_alpha_series(&seq, grid)?))
            }
            Gate::RelaxedCn { horizon } => {
                let values: Vec<f64> = (1..=*horizon as u64).map(|i| self.deltas.get(i, i + 1)).collect();
                check_deltas(&values)?;
                Ok(GateReport::RelaxedCn(check_relaxed_hypotheses(&self.deltas, s, *horizon)?))
            }
        }
    }
}

fn check_deltas(values: &[f64]) -> Result<()> {
    match values.iter().position(|d| !(*d >= 0.0 && *d < 1.0)) {
        Some(i) => Err(Error::rejected(format!(
            "δ_({},{}) = {} is outside [0, 1)",
            i + 1,
            i + 2,
            values[i]
        ))),
        None => Ok(()),
    }
}

/// Common fixed point of a family `{T_n}` by the orbit `x_n = T_n^r(x_{n-1})`.
///
/// The gate is evaluated first and a failing gate rejects the run. At each
/// step the scheme's display
/// `F(p(T_i x, T_j y)) <= F(δ_{i,j} [..]) - F(γ_{i,j} ψ(..))`
/// is checked with `x = x_{n-1}`, `y = x_n`, `(i, j) = (n, n+1)`, the pair
/// whose images are the next two iterates. After the run, residuals are
/// taken for every probe index, and `F(p(x_n, x_{n+1}))` is compared with
/// `C_n F(p(x_0, x_1))` where `C_n` is the running product of rate terms.
pub fn solve_family(
    space: &SpaceDescriptor,
    family: &MapFamily,
    fam: &FamilyConfig,
    x0: &Point,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    if fam.r == 0 {
        return Err(Error::rejected("iterate power r must be at least 1"));
    }
    if let Some((_, psi)) = &fam.gamma {
        if psi.arity() != fam.scheme.arity() {
            return Err(Error::rejected(format!(
                "ψ has arity {} but the {} scheme needs {}",
                psi.arity(),
                fam.scheme,
                fam.scheme.arity()
            )));
        }
    }
    let gate = fam.evaluate_gate()?;
    if !gate.passed() {
        return Err(Error::rejected(format!(
            "gate {:?} does not hold for δ = {}",
            fam.gate,
            fam.deltas.label()
        )));
    }

    let f = &fam.phi;
    let display = format!(
        "F(p(T_i x, T_j y)) <= F(δ_ij [{}]){} with F = {}",
        fam.scheme.display(),
        if fam.gamma.is_some() { " - F(γ_ij ψ)" } else { "" },
        f.label()
    );
    let mut log = HypothesisLog::new(display);
    let mut bad_delta = None;
    let trace = run_orbit(
        space,
        x0,
        cfg,
        &mut log,
        |t| iterate_power(&family.member(t as u64)?, fam.r),
        |t, pts| {
            if t < 2 {
                return StepCheck::Skipped;
            }
            let (i, j) = ((t - 1) as u64, t as u64);
            let (x, y, tix, tjy) = (&pts[t - 2], &pts[t - 1], &pts[t - 1], &pts[t]);
            let delta = fam.deltas.get(i, j);
            if !(0.0..1.0).contains(&delta) && bad_delta.is_none() {
                bad_delta = Some((i, j, delta));
            }
            let c = space.raw(x, y);
            let (u, v) = match fam.scheme {
                Scheme::KannanChoudhury | Scheme::KannanChoudhury3 => (space.raw(x, tix), space.raw(y, tjy)),
                Scheme::Chatterjea | Scheme::Chatterjea3 => (space.raw(x, tjy), space.raw(y, tix)),
            };
            let args = if fam.scheme.arity() == 3 { vec![u, v, c] } else { vec![u, v] };
            let bracket: f64 = args.iter().sum();
            let penalty = match &fam.gamma {
                Some((gamma, psi)) => f.eval(gamma.get(i, j) * psi.eval(&args)),
                None => 0.0,
            };
            StepCheck::Checked {
                lhs: f.eval(space.raw(tix, tjy)),
                rhs: f.eval(delta * bracket) - penalty,
                x: x.clone(),
                y: y.clone(),
            }
        },
    )?;
    if let Some((i, j, d)) = bad_delta {
        return Err(Error::rejected(format!("δ_({i},{j}) = {d} is outside [0, 1)")));
    }

    let x_star = trace.last().clone();
    let mut residuals = BTreeMap::new();
    let mut original = BTreeMap::new();
    for &m in &fam.probes {
        let tm = family.member(m)?;
        let label = format!("T_{m} = {}", tm.label());
        if fam.r > 1 {
            let composed = iterate_power(&tm, fam.r)?;
            residuals.insert(format!("T_{m}^{} = {}", fam.r, composed.label()), residual(space, &composed, &x_star));
            original.insert(label, residual(space, &tm, &x_star));
        } else {
            residuals.insert(label, residual(space, &tm, &x_star));
        }
    }

    let bound_check = product_bound(fam, &trace.step_dist, cfg.tol)?;
    let mut assumptions = Assumptions::of(space);
    if fam.r > 1 {
        assumptions
            .notes
            .push(format!("iterated T_n^{} and checked the original maps separately", fam.r));
    }
    assumptions
        .notes
        .push("probe residuals test a finite set of indices, not the whole family".into());
    let mut parameters = BTreeMap::from([
        ("K".to_string(), space.coeff_k()),
        ("s".to_string(), f.degree()),
        ("r".to_string(), fam.r as f64),
    ]);
    if let GateReport::AlphaSeries(c) = &gate {
        parameters.insert("lambda".into(), c.lambda);
        parameters.insert("n_lambda".into(), c.n_lambda as f64);
    }
    let mut report = FixedPointReport {
        solver: format!("family/{}", fam.scheme),
        point: x_star,
        residuals,
        trace,
        bound_check,
        hypothesis_log: log,
        assumptions,
        original_residuals: (fam.r > 1).then_some(original),
        uniqueness: None,
        gate: Some(gate),
        limit_residual: None,
        parameters,
        failed_checks: Vec::new(),
    };
    report.settle(cfg.residual_tol, cfg.tol);
    if report.failed_checks.iter().any(|c| c.starts_with("residual")) {
        report
            .assumptions
            .notes
            .push("some probed map does not fix the limit: it is not a common fixed point".into());
    }
    Ok(report)
}

/// `F(step_dist[n]) <= C_n F(step_dist[0])` with `C_0 = 1`.
fn product_bound(fam: &FamilyConfig, steps: &[f64], tol: f64) -> Result<Option<BoundCheck>> {
    let Some(first) = steps.first() else {
        return Ok(None);
    };
    let f = &fam.phi;
    let with_factor = fam.gate.with_2s_factor();
    let terms = if steps.len() > 1 {
        kannan_rate_terms(&fam.deltas.superdiagonal(steps.len() - 1), f.degree(), with_factor)?
            .terms()
            .to_vec()
    } else {
        Vec::new()
    };
    let seed = f.eval(*first);
    let mut theoretical = vec![seed];
    let mut c = 1.0;
    for t in &terms {
        c *= t;
        theoretical.push(c * seed);
    }
    let empirical = steps.iter().map(|d| f.eval(*d)).collect();
    Ok(Some(BoundCheck::compare(
        format!(
            "F(p(x_n,x_n+1)) <= C_n F(p(x_0,x_1)), C_n from rate terms{}",
            if with_factor { " with 2^s" } else { "" }
        ),
        theoretical,
        empirical,
        tol,
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerMapStatus {
    /// `T_n` fixes `x*` and no other grid point.
    Unique,
    /// `T_n` moves `x*`.
    NotFixed,
    /// The grid scan found another fixed point.
    SecondFixedPoint,
    /// `δ_{n,k(n)} >= 1/2`, so nothing is claimed for this map.
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerMapVerdict {
    pub n: u64,
    pub k_n: u64,
    pub delta: f64,
    pub status: PerMapStatus,
    /// `|T_n x* - x*|` in coordinates.
    pub displacement: Option<f64>,
    pub other_fixed_points: Vec<Point>,
}

/// For each probe `n` with `δ_{n,k(n)} < 1/2`, checks that `T_n` fixes the
/// report's point and scans `grid_count` points for any other `y` with
/// `|T_n y - y| <= tol`.
#[allow(clippy::too_many_arguments)]
pub fn per_map_fixed_point_check<K>(
    space: &SpaceDescriptor,
    family: &MapFamily,
    deltas: &DeltaMatrix,
    report: &FixedPointReport,
    k_of: K,
    probes: &[u64],
    grid_count: usize,
    tol: f64,
) -> Result<Vec<PerMapVerdict>>
where
    K: Fn(u64) -> u64,
{
    if !report.converged() {
        return Err(Error::rejected("the report did not converge"));
    }
    let x_star = &report.point;
    let grid = probe_grid(space, grid_count);
    let mut out = Vec::with_capacity(probes.len());
    for &n in probes {
        let k_n = k_of(n);
        let delta = deltas.get(n, k_n);
        if delta.is_nan() || delta >= 0.5 {
            out.push(PerMapVerdict {
                n,
                k_n,
                delta,
                status: PerMapStatus::Rejected,
                displacement: None,
                other_fixed_points: Vec::new(),
            });
            continue;
        }
        let tn: SelfMap = family.member(n)?;
        let displacement = tn.apply(x_star).sup_distance(x_star);
        let others: Vec<Point> = grid
            .iter()
            .filter(|y| y.sup_distance(x_star) > 10.0 * tol && tn.apply(y).sup_distance(y) <= tol)
            .take(10)
            .cloned()
            .collect();
        let status = if displacement > tol {
            PerMapStatus::NotFixed
        } else if !others.is_empty() {
            PerMapStatus::SecondFixedPoint
        } else {
            PerMapStatus::Unique
        };
        out.push(PerMapVerdict {
            n,
            k_n,
            delta,
            status,
            displacement: Some(displacement),
            other_fixed_points: others,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::StopReason;
    use super::*;
    use crate::spaces::{Domain, Oracle};

    fn abs() -> SpaceDescriptor {
        SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).build().unwrap()
    }

    fn halving_family() -> MapFamily {
        MapFamily::new("x/2^n", |n| SelfMap::divide_by(2f64.powi(n as i32)))
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [
            Scheme::KannanChoudhury,
            Scheme::KannanChoudhury3,
            Scheme::Chatterjea,
            Scheme::Chatterjea3,
        ] {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("banach".parse::<Scheme>().is_err());
    }

    #[test]
    fn failing_gate_rejects_before_iterating() {
        let fam = FamilyConfig::new(
            DeltaMatrix::constant(0.9),
            PhiFunction::identity(),
            Scheme::KannanChoudhury,
            Gate::relaxed(),
        );
        let err = solve_family(&abs(), &halving_family(), &fam, &Point::scalar(1.0), &SolverConfig::default());
        assert!(err.is_err());
        let fam = FamilyConfig::new(
            DeltaMatrix::constant(1.5),
            PhiFunction::identity(),
            Scheme::KannanChoudhury,
            Gate::relaxed(),
        );
        assert!(solve_family(&abs(), &halving_family(), &fam, &Point::scalar(1.0), &SolverConfig::default()).is_err());
    }

    #[test]
    fn halving_family_under_kannan_scheme() {
        // δ = 0.45 gives rate terms 9/11, so the relaxed gate holds.
        let fam = FamilyConfig::new(
            DeltaMatrix::constant(0.45),
            PhiFunction::identity(),
            Scheme::KannanChoudhury,
            Gate::relaxed(),
        );
        let r = solve_family(&abs(), &halving_family(), &fam, &Point::scalar(1.0), &SolverConfig::default()).unwrap();
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);
        assert_eq!(r.residuals.len(), DEFAULT_PROBES.len());
        assert!(r.point.x() < 1e-10);
        assert!(r.bound_check.as_ref().unwrap().satisfied);
    }

    #[test]
    fn violated_display_stops_the_orbit() {
        // x/2^n does not satisfy the display with δ = 0.01.
        let fam = FamilyConfig::new(
            DeltaMatrix::constant(0.01),
            PhiFunction::identity(),
            Scheme::Chatterjea,
            Gate::relaxed(),
        );
        let r = solve_family(&abs(), &halving_family(), &fam, &Point::scalar(1.0), &SolverConfig::default()).unwrap();
        assert_eq!(r.trace.stop_reason, StopReason::HypothesisViolated);
        assert!(!r.all_checks_passed());
        assert_eq!(r.hypothesis_log.witness.as_ref().unwrap().step, 2);
    }

    #[test]
    fn psi_arity_must_match() {
        let fam = FamilyConfig::new(
            DeltaMatrix::constant(0.45),
            PhiFunction::identity(),
            Scheme::KannanChoudhury,
            Gate::relaxed(),
        )
        .with_gamma(DeltaMatrix::constant(0.0), PsiFunction::sum(3).unwrap());
        assert!(solve_family(&abs(), &halving_family(), &fam, &Point::scalar(1.0), &SolverConfig::default()).is_err());
    }

    #[test]
    fn zero_gamma_matches_no_gamma() {
        let base = FamilyConfig::new(
            DeltaMatrix::constant(0.45),
            PhiFunction::identity(),
            Scheme::KannanChoudhury3,
            Gate::relaxed(),
        );
        let with = base
            .clone()
            .with_gamma(DeltaMatrix::constant(0.0), PsiFunction::max(3).unwrap());
        let a = solve_family(&abs(), &halving_family(), &base, &Point::scalar(1.0), &SolverConfig::default()).unwrap();
        let b = solve_family(&abs(), &halving_family(), &with, &Point::scalar(1.0), &SolverConfig::default()).unwrap();
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn powered_family_reports_original_residuals() {
        let fam = FamilyConfig::new(
            DeltaMatrix::constant(0.45),
            PhiFunction::identity(),
            Scheme::KannanChoudhury,
            Gate::relaxed(),
        )
        .with_power(2);
        let r = solve_family(&abs(), &halving_family(), &fam, &Point::scalar(1.0), &SolverConfig::default()).unwrap();
        assert_eq!(r.trace.iterates[1].x(), 0.25);
        assert!(r.converged() && r.all_checks_passed(), "{:?}", r.failed_checks);
        assert_eq!(r.original_residuals.as_ref().unwrap().len(), DEFAULT_PROBES.len());
    }

    #[test]
    fn per_map_check_on_simple_families() {
        let fam = FamilyConfig::new(
            DeltaMatrix::constant(0.45),
            PhiFunction::identity(),
            Scheme::KannanChoudhury,
            Gate::relaxed(),
        );
        let space = abs();
        let r = solve_family(&space, &halving_family(), &fam, &Point::scalar(1.0), &SolverConfig::default()).unwrap();
        // The halving maps only fix 0, but the orbit stops near 0, not at it.
        let v = per_map_fixed_point_check(
            &space,
            &halving_family(),
            &fam.deltas,
            &r,
            |n| n + 1,
            &DEFAULT_PROBES,
            1000,
            1e-9,
        )
        .unwrap();
        assert!(v.iter().all(|m| m.status == PerMapStatus::Unique), "{v:?}");

        let c = MapFamily::constant(Point::scalar(0.3));
        let r = solve_family(&space, &c, &fam, &Point::scalar(1.0), &SolverConfig::default()).unwrap();
        assert_eq!(r.point.x(), 0.3);
        let v = per_map_fixed_point_check(&space, &c, &fam.deltas, &r, |n| n + 1, &[1, 2, 50], 1000, 1e-9).unwrap();
        assert!(v.iter().all(|m| m.status == PerMapStatus::Unique));

        let big = DeltaMatrix::constant(0.6);
        let v = per_map_fixed_point_check(&space, &c, &big, &r, |n| n + 1, &[1], 1000, 1e-9).unwrap();
        assert_eq!(v[0].status, PerMapStatus::Rejected);
    }
}
