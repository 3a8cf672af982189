//! Sampling-based axiom verification.
//!
//! Sampling refutes, it never proves: a `pass` verdict means no
//! counterexample was found among the sampled tuples, and the report says
//! how many were checked.
//!
//! The polygon inequality is tested in ratio form. A chain violates it when
//! `(lhs - tol) / bracket > K` (or `lhs > tol` on a zero bracket), and
//! [`estimate_min_k`] maximizes the same ratio, so a pass at `K` always
//! implies an estimate of at most `K` on the same samples.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Point, Sampler, SpaceDescriptor, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    #[serde(rename = "pm1")]
    Pm1,
    #[serde(rename = "pm2")]
    Pm2,
    #[serde(rename = "pm3")]
    Pm3,
    #[serde(rename = "pm4")]
    Pm4,
    D1,
    D2,
    D3,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Pm1 => "pm1",
            Axiom::Pm2 => "pm2",
            Axiom::Pm3 => "pm3",
            Axiom::Pm4 => "pm4",
            Axiom::D1 => "D1",
            Axiom::D2 => "D2",
            Axiom::D3 => "D3",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Whether the polygon inequality is checked only at the declared order
/// `n` or at every order `1..=n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainMode {
    #[default]
    Exact,
    Upto,
}

impl std::str::FromStr for ChainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ChainMode::Exact),
            "upto" => Ok(ChainMode::Upto),
            other => Err(Error::rejected(format!("unknown chain mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckConfig {
    pub tol: f64,
    pub chain_mode: ChainMode,
    /// Minimum sup-norm separation for a pair to count as distinct in the
    /// converse direction of pm1.
    pub pm1_separation: f64,
    pub max_witnesses: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tol: DEFAULT_TOL,
            chain_mode: ChainMode::Exact,
            pm1_separation: 1e-4,
            max_witnesses: 5,
        }
    }
}

/// A sampled tuple that violates an axiom.
///
/// `points` is the tuple in the order the axiom reads it: `[x, y]` for
/// pairwise axioms, `[x]` for D1, `[x, z_1, .., z_n, y]` for chains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub axiom: Axiom,
    pub points: Vec<Point>,
    pub lhs: f64,
    pub rhs: f64,
    /// Coefficient the chain inequality was tested against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

impl Witness {
    /// Severity used to rank witnesses; larger is worse.
    fn excess(&self) -> f64 {
        match self.axiom {
            Axiom::Pm1 => -self.lhs,
            Axiom::Pm3 | Axiom::D2 => (self.lhs - self.rhs).abs(),
            _ => self.lhs - self.rhs,
        }
    }

    /// Re-evaluates the witness through the space's oracle. Returns true
    /// when the recomputed sides are bit-identical and still violate.
    pub fn recheck(&self, space: &SpaceDescriptor, tol: f64) -> bool {
        let pts = &self.points;
        let (lhs, rhs, violated) = match self.axiom {
            Axiom::Pm1 => {
                if pts[0] == pts[1] {
                    let a = space.raw(&pts[0], &pts[0]);
                    let b = space.raw(&pts[1], &pts[1]);
                    (a, b, a != b)
                } else {
                    let (gap, _) = pm1_gap(space, &pts[0], &pts[1]);
                    (gap, tol, gap <= tol)
                }
            }
            Axiom::Pm2 => {
                let own = space.raw(&pts[0], &pts[0]);
                let cross = space.raw(&pts[0], &pts[1]);
                (own, cross, own > cross + tol)
            }
            Axiom::Pm3 | Axiom::D2 => {
                let a = space.raw(&pts[0], &pts[1]);
                let b = space.raw(&pts[1], &pts[0]);
                (a, b, (a - b).abs() > tol)
            }
            Axiom::D1 => {
                let v = space.raw(&pts[0], &pts[0]);
                (v, 0.0, v.abs() > tol)
            }
            Axiom::Pm4 | Axiom::D3 => {
                let k = self.k.unwrap_or(space.coeff_k());
                let (lhs, bracket) = chain_sides(space, pts, self.axiom == Axiom::Pm4);
                (lhs, k * bracket, chain_violates(lhs, bracket, k, tol))
            }
        };
        violated && lhs.to_bits() == self.lhs.to_bits() && rhs.to_bits() == self.rhs.to_bits()
    }
}

/// Outcome of one checker.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub samples: usize,
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

struct Collector {
    axiom: Axiom,
    max: usize,
    witnesses: Vec<Witness>,
    samples: usize,
}

impl Collector {
    fn new(axiom: Axiom, cfg: &CheckConfig) -> Self {
        Collector {
            axiom,
            max: cfg.max_witnesses.max(1),
            witnesses: Vec::new(),
            samples: 0,
        }
    }

    fn offer(&mut self, w: Witness) {
        self.witnesses.push(w);
        // Keep the worst ones; ties broken by arrival order.
        self.witnesses
            .sort_by(|a, b| b.excess().partial_cmp(&a.excess()).unwrap_or(std::cmp::Ordering::Equal));
        self.witnesses.truncate(self.max);
    }

    fn finish(self) -> AxiomCheck {
        AxiomCheck {
            axiom: self.axiom,
            verdict: if self.witnesses.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            witnesses: self.witnesses,
            samples: self.samples,
        }
    }
}

fn require_samples(space: &SpaceDescriptor, sampler: &Sampler) -> Result<()> {
    if sampler.random_count() == 0 {
        return Err(Error::rejected("empty sample set"));
    }
    if !sampler.region().is_subset_of(space.domain()) {
        return Err(Error::rejected("sampler region is not inside the space's domain"));
    }
    Ok(())
}

/// Largest of `|p(x,x) - p(x,y)|` and `|p(y,y) - p(x,y)|`, and `p(x,y)`.
fn pm1_gap(space: &SpaceDescriptor, x: &Point, y: &Point) -> (f64, f64) {
    let cross = space.raw(x, y);
    let gx = (space.raw(x, x) - cross).abs();
    let gy = (space.raw(y, y) - cross).abs();
    (gx.max(gy), cross)
}

/// Left side and unscaled bracket of the polygon inequality along `chain`.
/// Self-distances of the interior points are added to the left side when
/// `with_self` is set (the partial-metric form).
fn chain_sides(space: &SpaceDescriptor, chain: &[Point], with_self: bool) -> (f64, f64) {
    let x = &chain[0];
    let y = &chain[chain.len() - 1];
    let mut lhs = space.raw(x, y);
    if with_self {
        for z in &chain[1..chain.len() - 1] {
            lhs += space.raw(z, z);
        }
    }
    let mut bracket = 0.0;
    for w in chain.windows(2) {
        bracket += space.raw(&w[0], &w[1]);
    }
    (lhs, bracket)
}

/// Tolerance-adjusted ratio of a chain, `None` when the bracket vanishes.
fn chain_ratio(lhs: f64, bracket: f64, tol: f64) -> Option<f64> {
    (bracket > 0.0).then(|| (lhs - tol) / bracket)
}

fn chain_violates(lhs: f64, bracket: f64, k: f64, tol: f64) -> bool {
    match chain_ratio(lhs, bracket, tol) {
        Some(r) => r > k,
        None => lhs > tol,
    }
}

fn chain_lengths(order: u32, mode: ChainMode) -> Vec<usize> {
    match mode {
        ChainMode::Exact => vec![order as usize],
        ChainMode::Upto => (1..=order as usize).collect(),
    }
}

/// pm1: `x = y` iff `p(x,x) = p(x,y) = p(y,y)`.
///
/// The forward direction is checked with zero tolerance on diagonal
/// samples; the converse flags sufficiently separated pairs whose three
/// values agree within `tol`.
pub fn check_pm1(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<AxiomCheck> {
    require_samples(space, sampler)?;
    let mut c = Collector::new(Axiom::Pm1, cfg);
    for x in sampler.points() {
        c.samples += 1;
        let a = space.raw(&x, &x);
        let b = space.raw(&x, &x);
        if a != b {
            c.offer(Witness {
                axiom: Axiom::Pm1,
                points: vec![x.clone(), x],
                lhs: a,
                rhs: b,
                k: None,
            });
        }
    }
    for (x, y) in sampler.pairs() {
        c.samples += 1;
        if x.sup_distance(&y) <= cfg.pm1_separation.max(10.0 * cfg.tol) {
            continue;
        }
        let (gap, _) = pm1_gap(space, &x, &y);
        if gap <= cfg.tol {
            c.offer(Witness {
                axiom: Axiom::Pm1,
                points: vec![x, y],
                lhs: gap,
                rhs: cfg.tol,
                k: None,
            });
        }
    }
    Ok(c.finish())
}

/// pm2: `p(x,x) <= p(x,y)`, checked in both orientations of each pair.
pub fn check_pm2(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<AxiomCheck> {
    require_samples(space, sampler)?;
    let mut c = Collector::new(Axiom::Pm2, cfg);
    for (x, y) in sampler.pairs() {
        c.samples += 1;
        for (a, b) in [(&x, &y), (&y, &x)] {
            let own = space.raw(a, a);
            let cross = space.raw(a, b);
            if own > cross + cfg.tol {
                c.offer(Witness {
                    axiom: Axiom::Pm2,
                    points: vec![a.clone(), b.clone()],
                    lhs: own,
                    rhs: cross,
                    k: None,
                });
            }
        }
    }
    Ok(c.finish())
}

fn check_symmetry(
    axiom: Axiom,
    space: &SpaceDescriptor,
    sampler: &Sampler,
    cfg: &CheckConfig,
) -> Result<AxiomCheck> {
    require_samples(space, sampler)?;
    let mut c = Collector::new(axiom, cfg);
    for (x, y) in sampler.pairs() {
        c.samples += 1;
        let a = space.raw(&x, &y);
        let b = space.raw(&y, &x);
        if (a - b).abs() > cfg.tol {
            c.offer(Witness {
                axiom,
                points: vec![x, y],
                lhs: a,
                rhs: b,
                k: None,
            });
        }
    }
    Ok(c.finish())
}

/// pm3: `p(x,y) = p(y,x)`.
pub fn check_pm3(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<AxiomCheck> {
    check_symmetry(Axiom::Pm3, space, sampler, cfg)
}

fn check_chains(
    axiom: Axiom,
    space: &SpaceDescriptor,
    sampler: &Sampler,
    chain_len: usize,
    k: f64,
    cfg: &CheckConfig,
) -> Result<AxiomCheck> {
    require_samples(space, sampler)?;
    if chain_len < 1 {
        return Err(Error::rejected("chain length must be at least 1"));
    }
    let lengths = match cfg.chain_mode {
        ChainMode::Exact => vec![chain_len],
        ChainMode::Upto => (1..=chain_len).collect(),
    };
    let with_self = axiom == Axiom::Pm4;
    let mut c = Collector::new(axiom, cfg);
    for len in lengths {
        for chain in sampler.tuples(len + 2) {
            c.samples += 1;
            let (lhs, bracket) = chain_sides(space, &chain, with_self);
            if chain_violates(lhs, bracket, k, cfg.tol) {
                c.offer(Witness {
                    axiom,
                    points: chain,
                    lhs,
                    rhs: k * bracket,
                    k: Some(k),
                });
            }
        }
    }
    Ok(c.finish())
}

/// pm4: `p(x,y) + sum p(z_i,z_i) <= K [p(x,z_1) + .. + p(z_n,y)]` with the
/// space's coefficient.
pub fn check_pm4(
    space: &SpaceDescriptor,
    sampler: &Sampler,
    chain_len: usize,
    cfg: &CheckConfig,
) -> Result<AxiomCheck> {
    check_chains(Axiom::Pm4, space, sampler, chain_len, space.coeff_k(), cfg)
}

/// pm4 against an explicit coefficient instead of the declared one.
pub fn check_pm4_with(
    space: &SpaceDescriptor,
    sampler: &Sampler,
    chain_len: usize,
    k: f64,
    cfg: &CheckConfig,
) -> Result<AxiomCheck> {
    check_chains(Axiom::Pm4, space, sampler, chain_len, k, cfg)
}

/// D1 to D3 of a metric type, at the space's `(n, K)`.
pub fn check_metric_type(
    space: &SpaceDescriptor,
    sampler: &Sampler,
    cfg: &CheckConfig,
) -> Result<Vec<AxiomCheck>> {
    check_metric_type_with(space, sampler, space.polygon_order() as usize, space.coeff_k(), cfg)
}

pub fn check_metric_type_with(
    space: &SpaceDescriptor,
    sampler: &Sampler,
    chain_len: usize,
    k: f64,
    cfg: &CheckConfig,
) -> Result<Vec<AxiomCheck>> {
    require_samples(space, sampler)?;
    let mut d1 = Collector::new(Axiom::D1, cfg);
    for x in sampler.points() {
        d1.samples += 1;
        let v = space.raw(&x, &x);
        if v.abs() > cfg.tol {
            d1.offer(Witness {
                axiom: Axiom::D1,
                points: vec![x],
                lhs: v,
                rhs: 0.0,
                k: None,
            });
        }
    }
    let d2 = check_symmetry(Axiom::D2, space, sampler, cfg)?;
    let d3 = check_chains(Axiom::D3, space, sampler, chain_len, k, cfg)?;
    Ok(vec![d1.finish(), d2, d3])
}

/// Sampled lower bound on the smallest feasible coefficient.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KEstimate {
    /// Largest tolerance-adjusted ratio, at least 1. Infinite when some
    /// chain has a vanishing bracket but a positive left side.
    pub value: f64,
    pub chains: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unbounded: Option<Witness>,
}

impl KEstimate {
    pub fn is_bounded(&self) -> bool {
        self.unbounded.is_none()
    }
}

/// Maximizes the polygon ratio over sampled chains (pm4 form, with
/// self-distances). Meaningful for spaces that pass pm1 to pm3.
pub fn estimate_min_k(
    space: &SpaceDescriptor,
    sampler: &Sampler,
    chain_len: usize,
    cfg: &CheckConfig,
) -> Result<KEstimate> {
    estimate_chain_ratio(space, sampler, chain_len, true, cfg)
}

fn estimate_chain_ratio(
    space: &SpaceDescriptor,
    sampler: &Sampler,
    chain_len: usize,
    with_self: bool,
    cfg: &CheckConfig,
) -> Result<KEstimate> {
    require_samples(space, sampler)?;
    if chain_len < 1 {
        return Err(Error::rejected("chain length must be at least 1"));
    }
    let mut best = 1.0_f64;
    let mut chains = 0;
    let mut unbounded = None;
    let lengths = match cfg.chain_mode {
        ChainMode::Exact => vec![chain_len],
        ChainMode::Upto => (1..=chain_len).collect(),
    };
    for len in lengths {
        for chain in sampler.tuples(len + 2) {
            chains += 1;
            let (lhs, bracket) = chain_sides(space, &chain, with_self);
            match chain_ratio(lhs, bracket, cfg.tol) {
                Some(r) => best = best.max(r),
                None if lhs > cfg.tol && unbounded.is_none() => {
                    unbounded = Some(Witness {
                        axiom: if with_self { Axiom::Pm4 } else { Axiom::D3 },
                        points: chain,
                        lhs,
                        rhs: 0.0,
                        k: None,
                    });
                }
                None => {}
            }
        }
    }
    Ok(KEstimate {
        value: if unbounded.is_some() { f64::INFINITY } else { best },
        chains,
        unbounded,
    })
}

/// Per-axiom verdicts for one space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    #[serde(flatten)]
    pub per_axiom: BTreeMap<Axiom, Verdict>,
    pub witnesses: Vec<Witness>,
    #[serde(rename = "samples")]
    pub samples_checked: usize,
    #[serde(rename = "minK", skip_serializing_if = "Option::is_none")]
    pub min_k_estimate: Option<f64>,
    #[serde(rename = "K")]
    pub coeff_k: f64,
    pub n: u32,
    #[serde(rename = "chainMode")]
    pub chain_mode: ChainMode,
    pub tol: f64,
    pub note: String,
}

impl AxiomReport {
    pub fn verdict(&self, axiom: Axiom) -> Option<Verdict> {
        self.per_axiom.get(&axiom).copied()
    }

    pub fn passes(&self, axioms: &[Axiom]) -> bool {
        axioms.iter().all(|a| self.verdict(*a) == Some(Verdict::Pass))
    }

    fn from_checks(space: &SpaceDescriptor, checks: Vec<AxiomCheck>, min_k: Option<f64>, cfg: &CheckConfig) -> Self {
        let mut per_axiom = BTreeMap::new();
        let mut witnesses = Vec::new();
        let mut samples = 0;
        for c in checks {
            per_axiom.insert(c.axiom, c.verdict);
            samples += c.samples;
            witnesses.extend(c.witnesses);
        }
        AxiomReport {
            note: format!("pass means no counterexample in {samples} sampled tuples"),
            per_axiom,
            witnesses,
            samples_checked: samples,
            min_k_estimate: min_k,
            coeff_k: space.coeff_k(),
            n: space.polygon_order(),
            chain_mode: cfg.chain_mode,
            tol: cfg.tol,
        }
    }
}

/// pm1 to pm4 at the space's declared `(n, K)`, plus the K estimate.
pub fn check_partial_metric_axioms(
    space: &SpaceDescriptor,
    sampler: &Sampler,
    cfg: &CheckConfig,
) -> Result<AxiomReport> {
    let n = space.polygon_order() as usize;
    let checks = vec![
        check_pm1(space, sampler, cfg)?,
        check_pm2(space, sampler, cfg)?,
        check_pm3(space, sampler, cfg)?,
        check_pm4(space, sampler, n, cfg)?,
    ];
    let est = estimate_min_k(space, sampler, n, cfg)?;
    Ok(AxiomReport::from_checks(space, checks, Some(est.value), cfg))
}

/// Every axiom, pm1 to pm4 and D1 to D3, at the space's `(n, K)`.
pub fn check_all(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<AxiomReport> {
    let n = space.polygon_order() as usize;
    let mut checks = vec![
        check_pm1(space, sampler, cfg)?,
        check_pm2(space, sampler, cfg)?,
        check_pm3(space, sampler, cfg)?,
        check_pm4(space, sampler, n, cfg)?,
    ];
    checks.extend(check_metric_type(space, sampler, cfg)?);
    let est = estimate_min_k(space, sampler, n, cfg)?;
    Ok(AxiomReport::from_checks(space, checks, Some(est.value), cfg))
}

/// D1 to D3 only, at the space's `(n, K)`. No K estimate.
pub fn metric_type_report(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<AxiomReport> {
    let checks = check_metric_type(space, sampler, cfg)?;
    Ok(AxiomReport::from_checks(space, checks, None, cfg))
}

/// Membership labels produced by [`classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum ClassLabel {
    #[serde(rename = "KPMS")]
    Kpms { n: u32, k: f64 },
    PartialBMetric { k: f64 },
    PartialRectangular,
    MetricType { n: u32, k: f64 },
    Metric,
}

/// Runs the checkers at `n = 1` with the declared K, at `n = 2` with
/// `K = 1`, and at the declared `(n, K)`, and returns every class whose
/// axiom set found no counterexample.
pub fn classify(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> Result<Vec<ClassLabel>> {
    let k = space.coeff_k();
    let n = space.polygon_order();
    let exact = CheckConfig {
        chain_mode: ChainMode::Exact,
        ..cfg.clone()
    };

    let base_ok = check_pm1(space, sampler, cfg)?.passed()
        && check_pm2(space, sampler, cfg)?.passed()
        && check_pm3(space, sampler, cfg)?.passed();
    let mut labels = Vec::new();

    if base_ok && check_pm4_with(space, sampler, n as usize, k, cfg)?.passed() {
        labels.push(ClassLabel::Kpms { n, k });
    }
    if base_ok && check_pm4_with(space, sampler, 1, k, &exact)?.passed() {
        labels.push(ClassLabel::PartialBMetric { k });
    }
    if base_ok && check_pm4_with(space, sampler, 2, 1.0, &exact)?.passed() {
        labels.push(ClassLabel::PartialRectangular);
    }
    if check_metric_type_with(space, sampler, n as usize, k, cfg)?
        .iter()
        .all(AxiomCheck::passed)
    {
        labels.push(ClassLabel::MetricType { n, k });
    }
    let metric_axioms = check_metric_type_with(space, sampler, 1, 1.0, &exact)?
        .iter()
        .all(AxiomCheck::passed);
    if metric_axioms && separates_points(space, sampler, cfg) {
        labels.push(ClassLabel::Metric);
    }
    Ok(labels)
}

/// Identity of indiscernibles on separated sampled pairs: `d(x,y) > tol`.
fn separates_points(space: &SpaceDescriptor, sampler: &Sampler, cfg: &CheckConfig) -> bool {
    sampler.pairs().iter().all(|(x, y)| {
        x.sup_distance(y) <= cfg.pm1_separation.max(10.0 * cfg.tol) || space.raw(x, y) > cfg.tol
    })
}

/// The polygon orders a chain-mode setting exercises for a declared `n`.
pub fn exercised_orders(n: u32, mode: ChainMode) -> Vec<usize> {
    chain_lengths(n, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Domain, Oracle, SpaceClass};

    fn space(o: Oracle, d: Domain, k: f64) -> SpaceDescriptor {
        SpaceDescriptor::builder(o, d).coefficient(k).build().unwrap()
    }

    fn e1(k: f64) -> SpaceDescriptor {
        space(Oracle::max_power_plus_abs_power(2.0), Domain::closed(0.0, 10.0).unwrap(), k)
    }

    fn e2() -> SpaceDescriptor {
        let o = Oracle::Sum(vec![Oracle::pow(Oracle::AbsDiff, 2.0), Oracle::Const(2.0)]);
        space(o, Domain::open(0.0, 1.0).unwrap(), 2.0)
    }

    fn metric() -> SpaceDescriptor {
        space(Oracle::AbsDiff, Domain::unit(), 1.0)
    }

    fn sampler(s: &SpaceDescriptor) -> Sampler {
        Sampler::new(11, s.domain().clone()).with_budget(4000)
    }

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    #[test]
    fn pm1_examples() {
        let s = e2();
        assert!(check_pm1(&s, &sampler(&s), &cfg()).unwrap().passed());
        let s = e1(4.0);
        assert!(check_pm1(&s, &sampler(&s), &cfg()).unwrap().passed());
        let s = space(Oracle::Const(1.0), Domain::unit(), 1.0);
        let c = check_pm1(&s, &sampler(&s), &cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert!(c.witnesses.iter().all(|w| w.points[0] != w.points[1]));
    }

    #[test]
    fn pm2_examples() {
        let s = e1(4.0);
        assert!(check_pm2(&s, &sampler(&s), &cfg()).unwrap().passed());
        let s = metric();
        assert!(check_pm2(&s, &sampler(&s), &cfg()).unwrap().passed());
        let s = space(Oracle::affine(-1.0, 2.0, Oracle::AbsDiff), Domain::unit(), 1.0);
        let c = check_pm2(&s, &sampler(&s), &cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        // Worst witness is the widest pair: p(x,x) = 2 against p(x,y) = 1.
        let w = &c.witnesses[0];
        assert_eq!((w.lhs, w.rhs), (2.0, 1.0));
        assert_eq!(w.points[0].sup_distance(&w.points[1]), 1.0);
    }

    #[test]
    fn pm3_examples() {
        let s = e1(4.0);
        assert!(check_pm3(&s, &sampler(&s), &cfg()).unwrap().passed());
        let s = metric();
        assert!(check_pm3(&s, &sampler(&s), &cfg()).unwrap().passed());
        let s = space(Oracle::Sum(vec![Oracle::ForwardExcess, Oracle::Const(1.0)]), Domain::unit(), 1.0);
        let c = check_pm3(&s, &sampler(&s), &cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        let w = &c.witnesses[0];
        assert_eq!((w.lhs - w.rhs).abs(), 1.0);
        let x = if w.lhs > w.rhs { w.points[0].x() } else { w.points[1].x() };
        assert_eq!(x, 1.0);
    }

    #[test]
    fn pm4_examples() {
        let s = e1(4.0);
        assert!(check_pm4(&s, &sampler(&s), 1, &cfg()).unwrap().passed());
        let s = metric();
        assert!(check_pm4(&s, &sampler(&s), 1, &cfg()).unwrap().passed());
        let s = e1(1.0);
        let c = check_pm4(&s, &sampler(&s), 1, &cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert!(c.witnesses.iter().all(|w| w.recheck(&s, cfg().tol)));
        assert!(check_pm4(&s, &sampler(&s), 0, &cfg()).is_err());
    }

    #[test]
    fn metric_type_examples() {
        let s = e2();
        let checks = check_metric_type(&s, &sampler(&s), &cfg()).unwrap();
        assert_eq!(checks[0].axiom, Axiom::D1);
        assert_eq!(checks[0].verdict, Verdict::Fail);
        assert_eq!(checks[0].witnesses[0].lhs, 2.0);
        let s = metric();
        assert!(check_metric_type(&s, &sampler(&s), &cfg()).unwrap().iter().all(AxiomCheck::passed));
    }

    #[test]
    fn min_k_examples() {
        let s = metric();
        let est = estimate_min_k(&s, &sampler(&s), 1, &cfg()).unwrap();
        assert_eq!(est.value, 1.0);
        let s = e1(4.0);
        let est = estimate_min_k(&s, &sampler(&s), 1, &cfg()).unwrap();
        assert!(est.value > 1.0 && est.value <= 4.0, "{}", est.value);
        let s = e2();
        let est = estimate_min_k(&s, &sampler(&s), 1, &cfg()).unwrap();
        assert!(est.value <= 2.0, "{}", est.value);
    }

    #[test]
    fn unbounded_ratio_is_reported() {
        // Positive constant left side against a vanishing bracket.
        let o = Oracle::custom("spike", |x, y| if x == y { 0.0 } else { 1.0 });
        let s = space(o, Domain::unit(), 1.0);
        let sm = Sampler::new(1, Domain::unit()).with_grid_density(2).with_budget(40);
        let est = estimate_min_k(&s, &sm, 1, &cfg()).unwrap();
        // x = y = 0 with z = 0 has bracket 0 and lhs 0: no blow-up from it,
        // but x != y requires z to differ from one of them, so bracket > 0.
        assert!(est.is_bounded());
        let o = Oracle::custom("const-left", |x, y| if x == y { 1.0 } else { 0.0 });
        let s = space(o, Domain::unit(), 1.0);
        let est = estimate_min_k(&s, &sm, 1, &cfg()).unwrap();
        assert!(!est.is_bounded());
        assert!(est.value.is_infinite());
    }

    #[test]
    fn classify_examples() {
        let s = e1(4.0);
        let labels = classify(&s, &sampler(&s), &cfg()).unwrap();
        assert!(labels.contains(&ClassLabel::PartialBMetric { k: 4.0 }));
        assert!(labels.contains(&ClassLabel::Kpms { n: 1, k: 4.0 }));
        assert!(!labels.contains(&ClassLabel::Metric));

        let s = metric();
        let labels = classify(&s, &sampler(&s), &cfg()).unwrap();
        assert!(labels.contains(&ClassLabel::Metric));
        assert!(labels.contains(&ClassLabel::MetricType { n: 1, k: 1.0 }));
        assert!(labels.contains(&ClassLabel::Kpms { n: 1, k: 1.0 }));

        let s = e2();
        let labels = classify(&s, &sampler(&s), &cfg()).unwrap();
        assert!(labels.contains(&ClassLabel::PartialBMetric { k: 2.0 }));
        assert!(!labels.iter().any(|l| matches!(l, ClassLabel::MetricType { .. })));
    }

    #[test]
    fn sampler_outside_domain_is_rejected() {
        let s = e2();
        let sm = Sampler::new(0, Domain::unit());
        assert!(check_pm1(&s, &sm, &cfg()).is_err());
        let sm = Sampler::new(0, s.domain().clone()).with_budget(0);
        assert!(check_pm2(&s, &sm, &cfg()).is_err());
    }

    #[test]
    fn report_json_shape() {
        let s = e2();
        let r = check_all(&s, &sampler(&s), &cfg()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["pm1"], "pass");
        assert_eq!(v["D1"], "fail");
        assert!(v["samples"].as_u64().unwrap() > 0);
        assert!(v["minK"].as_f64().unwrap() <= 2.0);
        assert!(!v["witnesses"].as_array().unwrap().is_empty());
        let _ = SpaceClass::Kpms;
    }
}
