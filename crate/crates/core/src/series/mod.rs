//! Rate-term arithmetic and finite-horizon α-series certificates.
//!
//! A sequence `a_i` is an α-series when some `λ < 1` and `n(λ)` give
//! `a_1 + .. + a_L <= λ L` for every `L >= n(λ)`. Only a finite prefix can
//! be examined, so every certificate states the horizon it was checked to.

mod exact;

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID: [f64; 11] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

/// One contraction coefficient, exact when it is known as a rational.
#[derive(Clone, Debug, PartialEq)]
pub enum Delta {
    Float(f64),
    Exact(BigRational),
}

impl Delta {
    pub fn value(&self) -> f64 {
        match self {
            Delta::Float(v) => *v,
            Delta::Exact(r) => exact::to_f64(r).unwrap_or(f64::NAN),
        }
    }
}

impl From<f64> for Delta {
    fn from(v: f64) -> Self {
        Delta::Float(v)
    }
}

impl From<BigRational> for Delta {
    fn from(r: BigRational) -> Self {
        Delta::Exact(r)
    }
}

type FloatEntry = dyn Fn(u64, u64) -> f64 + Send + Sync;
type ExactEntry = dyn Fn(u64, u64) -> Option<BigRational> + Send + Sync;

/// Coefficients `δ_{i,j}` indexed from 1.
///
/// An optional exact generator supplies rationals for the indices where
/// they are cheap; the float generator covers the rest.
#[derive(Clone)]
pub struct DeltaMatrix {
    label: String,
    float: Arc<FloatEntry>,
    exact: Option<Arc<ExactEntry>>,
}

impl DeltaMatrix {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64, u64) -> f64 + Send + Sync + 'static,
    {
        DeltaMatrix {
            label: label.into(),
            float: Arc::new(f),
            exact: None,
        }
    }

    /// Adds an exact generator. Where it returns `Some`, its value wins.
    pub fn with_exact<E>(mut self, e: E) -> Self
    where
        E: Fn(u64, u64) -> Option<BigRational> + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(e));
        self
    }

    pub fn constant(v: f64) -> Self {
        DeltaMatrix::new(format!("{v}"), move |_, _| v)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn get(&self, i: u64, j: u64) -> f64 {
        match self.exact(i, j) {
            Some(r) => exact::to_f64(&r).unwrap_or_else(|| (self.float)(i, j)),
            None => (self.float)(i, j),
        }
    }

    pub fn exact(&self, i: u64, j: u64) -> Option<BigRational> {
        self.exact.as_ref().and_then(|e| e(i, j))
    }

    pub fn entry(&self, i: u64, j: u64) -> Delta {
        match self.exact(i, j) {
            Some(r) => Delta::Exact(r),
            None => Delta::Float((self.float)(i, j)),
        }
    }

    /// `δ_{i,i+1}` for `i = 1..=horizon`.
    pub fn superdiagonal(&self, horizon: usize) -> Vec<Delta> {
        (1..=horizon as u64).map(|i| self.entry(i, i + 1)).collect()
    }
}

impl fmt::Debug for DeltaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeltaMatrix")
            .field("label", &self.label)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateProvenance {
    UserGiven,
    FromDeltas { s: f64, with_2s_factor: bool },
}

/// Finite prefix `a_1..a_H` of a non-negative sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSequence {
    terms: Vec<f64>,
    provenance: RateProvenance,
}

impl RateSequence {
    pub fn new(terms: Vec<f64>) -> Result<Self> {
        Self::with_provenance(terms, RateProvenance::UserGiven)
    }

    fn with_provenance(terms: Vec<f64>, provenance: RateProvenance) -> Result<Self> {
        if let Some((i, v)) = terms.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::rejected(format!("term a_{} = {v} is not a finite non-negative number", i + 1)));
        }
        Ok(RateSequence { terms, provenance })
    }

    /// Reads one term per line under an `a_i` header.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 1 || headers.get(0).map(str::trim) != Some("a_i") {
            return Err(Error::rejected("term CSV must have a single `a_i` column"));
        }
        let mut terms = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = rec.get(0).unwrap_or("").trim();
            let v: f64 = field
                .parse()
                .map_err(|_| Error::rejected(format!("`{field}` is not a number")))?;
            terms.push(v);
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn horizon(&self) -> usize {
        self.terms.len()
    }

    pub fn provenance(&self) -> &RateProvenance {
        &self.provenance
    }

    /// `S_L` for `L = 1..=H`, summed left to right.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.terms
            .iter()
            .map(|a| {
                acc += a;
                acc
            })
            .collect()
    }
}

fn power(v: f64, s: f64) -> f64 {
    if s == 1.0 {
        v
    } else if s == 0.5 {
        v.sqrt()
    } else if s == 2.0 {
        v * v
    } else {
        v.powf(s)
    }
}

/// `2^s`, exact for integer `s` and correctly rounded for `s = 1/2`.
fn two_to_the(s: f64) -> f64 {
    if s == 0.5 {
        SQRT_2
    } else if s.fract() == 0.0 && s.abs() < 1000.0 {
        2f64.powi(s as i32)
    } else {
        2f64.powf(s)
    }
}

fn float_term(i: usize, delta: f64, s: f64) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::rejected(format!("δ_{} = {delta} must be a finite non-negative number", i + 1)));
    }
    if delta >= 1.0 {
        return Err(Error::rejected(format!("δ_{} = {delta} must be below 1", i + 1)));
    }
    let d = power(delta, s);
    if d >= 1.0 {
        return Err(Error::rejected(format!("δ_{}^s = {d} must be below 1", i + 1)));
    }
    Ok(d / (1.0 - d))
}

/// `δ^s / (1 - δ^s)` for one coefficient, before any `2^s` factor.
fn core_term(i: usize, delta: &Delta, s: f64) -> Result<f64> {
    match delta {
        Delta::Float(v) => float_term(i, *v, s),
        Delta::Exact(r) => {
            let v = delta.value();
            if v >= 1.0 || v.is_nan() {
                return Err(Error::rejected(format!("δ_{} = {r} must be below 1", i + 1)));
            }
            match exact::rate_term(r, s).and_then(|t| exact::to_f64(&t)) {
                Some(t) => Ok(t),
                None => float_term(i, v, s),
            }
        }
    }
}

/// Rate terms `[2^s] δ_i^s / (1 - δ_i^s)` from the coefficients
/// `δ_i = δ_{i,i+1}`. The bracketed factor is applied when `with_2s_factor`
/// is set.
pub fn kannan_rate_terms(deltas: &[Delta], s: f64, with_2s_factor: bool) -> Result<RateSequence> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::rejected(format!("homogeneity degree {s} must be positive")));
    }
    let factor = if with_2s_factor { two_to_the(s) } else { 1.0 };
    let terms = deltas
        .iter()
        .enumerate()
        .map(|(i, d)| core_term(i, d, s).map(|t| if with_2s_factor { factor * t } else { t }))
        .collect::<Result<Vec<_>>>()?;
    RateSequence::with_provenance(terms, RateProvenance::FromDeltas { s, with_2s_factor })
}

/// Running products `C_n = s_1 ... s_n` of the rate terms without the
/// `2^s` factor.
pub fn product_terms_cn(deltas: &[Delta], s: f64) -> Result<Vec<f64>> {
    let seq = kannan_rate_terms(deltas, s, false)?;
    Ok(running_product(seq.terms()))
}

fn running_product(terms: &[f64]) -> Vec<f64> {
    let mut acc = 1.0;
    terms
        .iter()
        .map(|t| {
            acc *= t;
            acc
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    RefutedAtHorizon,
    Inconclusive,
}

/// Outcome of the window check for one `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaCheck {
    pub lambda: f64,
    /// Smallest `n` such that `S_L <= λ L` for every `L` in `n..=H`.
    /// Equals `H + 1` when even `S_H` exceeds `λ H`.
    pub n_lambda: usize,
    pub status: CertificateStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSeriesCertificate {
    pub lambda: f64,
    pub n_lambda: usize,
    pub horizon_checked: usize,
    pub status: CertificateStatus,
    /// Index `L` with `S_L > λ L` for every grid `λ`, on refutation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_l: Option<usize>,
    pub per_lambda: Vec<LambdaCheck>,
    pub note: String,
}

impl AlphaSeriesCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

fn check_lambda(sums: &[f64], lambda: f64) -> LambdaCheck {
    let h = sums.len();
    let last_bad = sums
        .iter()
        .enumerate()
        .rev()
        .find(|(i, s)| **s > lambda * (*i as f64 + 1.0))
        .map(|(i, _)| i + 1);
    let n_lambda = last_bad.map_or(1, |l| l + 1);
    let status = if n_lambda <= h / 2 {
        CertificateStatus::Certified
    } else if last_bad == Some(h) {
        CertificateStatus::RefutedAtHorizon
    } else {
        CertificateStatus::Inconclusive
    };
    LambdaCheck {
        lambda,
        n_lambda,
        status,
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::rejected("λ grid is empty"));
    }
    if let Some(l) = grid.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::rejected(format!("grid value {l} is not in (0, 1)")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::rejected("λ grid must be strictly increasing"));
    }
    Ok(())
}

/// Window check for every grid value, in grid order.
pub fn alpha_series_statuses(seq: &RateSequence, grid: &[f64]) -> Result<Vec<LambdaCheck>> {
    validate_grid(grid)?;
    if seq.horizon() < 2 {
        return Err(Error::rejected("horizon must be at least 2"));
    }
    let sums = seq.partial_sums();
    Ok(grid.iter().map(|l| check_lambda(&sums, *l)).collect())
}

/// Smallest grid `λ` whose threshold `n(λ)` is at most half the horizon.
///
/// Without one, the result is `RefutedAtHorizon` when `S_H` exceeds `λ H`
/// even for the largest grid value, and `Inconclusive` otherwise.
pub fn certify_alpha_series(seq: &RateSequence, grid: &[f64]) -> Result<AlphaSeriesCertificate> {
    let per_lambda = alpha_series_statuses(seq, grid)?;
    let h = seq.horizon();
    let chosen = per_lambda
        .iter()
        .find(|c| c.status == CertificateStatus::Certified)
        .or_else(|| per_lambda.last())
        .copied()
        .expect("grid is non-empty");
    let witness_l = (chosen.status == CertificateStatus::RefutedAtHorizon).then_some(h);
    let note = match chosen.status {
        CertificateStatus::Certified => format!(
            "partial sums stay below {}·L for L in {}..={h}; nothing is claimed beyond L = {h}",
            chosen.lambda, chosen.n_lambda
        ),
        CertificateStatus::RefutedAtHorizon => {
            format!("S_{h} exceeds λ·{h} for every grid λ")
        }
        CertificateStatus::Inconclusive => {
            format!("no grid λ settles within the first {} indices", h / 2)
        }
    };
    Ok(AlphaSeriesCertificate {
        lambda: chosen.lambda,
        n_lambda: chosen.n_lambda,
        horizon_checked: h,
        status: chosen.status,
        witness_l,
        per_lambda,
        note,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summability {
    Summable,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelaxedReport {
    pub horizon: usize,
    pub s: f64,
    /// Largest per-`j` limsup estimate and the `j` attaining it.
    pub worst_limsup: f64,
    pub worst_j: u64,
    pub limsup_ok: bool,
    #[serde(skip)]
    pub limsup_per_j: Vec<f64>,
    pub cn_summable: Summability,
    /// Largest rate term over the upper half of the horizon.
    pub tail_ratio: f64,
    pub cn_partial_sum: f64,
    #[serde(skip)]
    pub cn: Vec<f64>,
}

impl RelaxedReport {
    pub fn passed(&self) -> bool {
        self.limsup_ok && self.cn_summable == Summability::Summable
    }
}

/// Estimates `limsup_i δ_{i,j}^s` for each `j` in the lower half of the
/// horizon as the maximum over `i` in the upper half, and decides whether
/// `Σ C_n` converges from the tail of the rate terms.
pub fn check_relaxed_hypotheses(matrix: &DeltaMatrix, s: f64, horizon: usize) -> Result<RelaxedReport> {
    if horizon < 4 {
        return Err(Error::rejected("horizon must be at least 4"));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::rejected(format!("homogeneity degree {s} must be positive")));
    }
    let h = horizon as u64;
    let upper = (h / 2 + 1)..=h;
    let limsup_per_j: Vec<f64> = (1..=h / 2)
        .map(|j| {
            upper
                .clone()
                .map(|i| power(matrix.get(i, j), s))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let (worst_idx, worst) = limsup_per_j
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });

    let terms = kannan_rate_terms(&matrix.superdiagonal(horizon), s, false)?;
    let cn = running_product(terms.terms());
    let tail = &terms.terms()[horizon / 2..];
    let tail_max = tail.iter().copied().fold(0.0, f64::max);
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let cn_summable = if tail_max < 1.0 {
        Summability::Summable
    } else if tail_min >= 1.0 && cn.last().is_some_and(|c| *c > 0.0) {
        Summability::Divergent
    } else {
        plateau(&cn)
    };

    Ok(RelaxedReport {
        horizon,
        s,
        worst_limsup: worst,
        worst_j: worst_idx as u64 + 1,
        limsup_ok: worst < 1.0,
        limsup_per_j,
        cn_summable,
        tail_ratio: tail_max,
        cn_partial_sum: cn.iter().sum(),
        cn,
    })
}

/// Fallback when the ratio test is mixed: the partial sums must have
/// flattened over the last quarter of the horizon.
fn plateau(cn: &[f64]) -> Summability {
    let total: f64 = cn.iter().sum();
    if !total.is_finite() {
        return Summability::Divergent;
    }
    let last_quarter: f64 = cn[cn.len() * 3 / 4..].iter().sum();
    if last_quarter <= 1e-12 * total.max(f64::MIN_POSITIVE) {
        Summability::Summable
    } else {
        Summability::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn e4_deltas(h: usize) -> Vec<Delta> {
        (1..=h as u32)
            .map(|i| {
                let d = BigInt::from(1) + (BigInt::from(1) << i);
                Delta::Exact(BigRational::new(1.into(), d.pow(2)))
            })
            .collect()
    }

    #[test]
    fn e3_terms_with_factor() {
        let seq = kannan_rate_terms(&e4_deltas(30), 0.5, true).unwrap();
        for (i, t) in seq.terms().iter().enumerate() {
            assert_eq!(*t, SQRT_2 / 2f64.powi(i as i32 + 1));
        }
        assert_eq!(seq.terms()[0], std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn e4_terms_and_products_are_dyadic() {
        let seq = kannan_rate_terms(&e4_deltas(20), 0.5, false).unwrap();
        assert_eq!(seq.terms()[4], 1.0 / 32.0);
        let cn = product_terms_cn(&e4_deltas(20), 0.5).unwrap();
        for (n, c) in cn.iter().enumerate() {
            let n = n as i32 + 1;
            assert_eq!(*c, 2f64.powi(-n * (n + 1) / 2));
        }
    }

    #[test]
    fn degenerate_terms() {
        let seq = kannan_rate_terms(&[Delta::Float(0.0)], 1.0, false).unwrap();
        assert_eq!(seq.terms(), &[0.0]);
        assert_eq!(product_terms_cn(&[Delta::Float(0.5)], 1.0).unwrap(), vec![1.0]);
        assert!(kannan_rate_terms(&[Delta::Float(1.0)], 1.0, false).is_err());
        assert!(kannan_rate_terms(&[Delta::Float(0.5)], 0.0, false).is_err());
    }

    #[test]
    fn harmonic_prefix() {
        let seq = RateSequence::new((1..=1000).map(|i| 1.0 / i as f64).collect()).unwrap();
        let cert = certify_alpha_series(&seq, &[0.5, 0.9]).unwrap();
        // H_4 = 2.083 > 2 and H_5 = 2.283 <= 2.5, so λ = 0.5 already works.
        assert_eq!((cert.lambda, cert.n_lambda, cert.status), (0.5, 5, CertificateStatus::Certified));
        let cert = certify_alpha_series(&seq, &[0.9]).unwrap();
        assert_eq!((cert.lambda, cert.n_lambda), (0.9, 2));
    }

    #[test]
    fn constant_ones_are_refuted() {
        let seq = RateSequence::new(vec![1.0; 100]).unwrap();
        let cert = certify_alpha_series(&seq, &DEFAULT_GRID).unwrap();
        assert_eq!(cert.status, CertificateStatus::RefutedAtHorizon);
        assert_eq!(cert.witness_l, Some(100));
    }

    #[test]
    fn grid_validation() {
        let seq = RateSequence::new(vec![0.1; 10]).unwrap();
        assert!(certify_alpha_series(&seq, &[]).is_err());
        assert!(certify_alpha_series(&seq, &[0.5, 0.2]).is_err());
        assert!(certify_alpha_series(&seq, &[1.0]).is_err());
        assert!(RateSequence::new(vec![-1.0]).is_err());
    }

    #[test]
    fn relaxed_examples() {
        let e5 = DeltaMatrix::new("e5", |i, j| 1.0 / 3.0 + 1.0 / ((i.abs_diff(j)) as f64 + 6.0));
        let r = check_relaxed_hypotheses(&e5, 1.0, 400).unwrap();
        assert!(r.passed());
        assert!((r.limsup_per_j[0] - 1.0 / 3.0).abs() < 1e-2);
        for (n, c) in r.cn.iter().enumerate() {
            let want = (10.0f64 / 11.0).powi(n as i32 + 1);
            assert!(((c - want) / want).abs() < 1e-12);
        }

        let r = check_relaxed_hypotheses(&DeltaMatrix::constant(0.9), 1.0, 100).unwrap();
        assert_eq!(r.cn_summable, Summability::Divergent);
        assert!(r.limsup_ok);

        let r = check_relaxed_hypotheses(&DeltaMatrix::constant(0.0), 1.0, 100).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn csv_terms() {
        let seq = RateSequence::from_csv("a_i\n0.5\n0.25\n".as_bytes()).unwrap();
        assert_eq!(seq.terms(), &[0.5, 0.25]);
        assert!(RateSequence::from_csv("x\n1\n".as_bytes()).is_err());
    }
}
