use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Point;

type DistanceFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// A user-supplied distance function registered under a name.
///
/// Custom oracles evaluate like any other but cannot be written to a
/// space document.
#[derive(Clone)]
pub struct CustomOracle {
    name: String,
    f: Arc<DistanceFn>,
}

impl CustomOracle {
    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomOracle").field("name", &self.name).finish()
    }
}

/// Distance oracle as an expression over the two argument points.
///
/// Every built-in node is written so that swapping the arguments gives a
/// bit-identical result whenever the underlying formula is symmetric.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    /// Euclidean distance `|x - y|` (plain absolute difference in one dimension).
    AbsDiff,
    /// Sum over coordinates of `max{x_i, y_i}`.
    Max,
    /// Sum over coordinates of `max{x_i - y_i, 0}`; deliberately asymmetric.
    ForwardExcess,
    Const(f64),
    Pow { base: Box<Oracle>, exp: f64 },
    Sum(Vec<Oracle>),
    Affine { scale: f64, shift: f64, inner: Box<Oracle> },
    /// `2 p(x,y) - p(x,x) - p(y,y)`.
    PartialToMetric(Box<Oracle>),
    /// `(d(x,y) + d(x,x0) + d(y,x0)) / 2`.
    Basepoint { metric: Box<Oracle>, x0: Point },
    /// Zero on exact coordinate equality, `p(x,y)` elsewhere.
    InducedDp(Box<Oracle>),
    #[serde(skip)]
    Custom(CustomOracle),
}

impl Oracle {
    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Oracle::Custom(CustomOracle {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    pub fn pow(base: Oracle, exp: f64) -> Self {
        Oracle::Pow {
            base: Box::new(base),
            exp,
        }
    }

    pub fn affine(scale: f64, shift: f64, inner: Oracle) -> Self {
        Oracle::Affine {
            scale,
            shift,
            inner: Box::new(inner),
        }
    }

    /// `[max{x,y}]^s + |x-y|^s`.
    pub fn max_power_plus_abs_power(s: f64) -> Self {
        Oracle::Sum(vec![
            Oracle::pow(Oracle::Max, s),
            Oracle::pow(Oracle::AbsDiff, s),
        ])
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Oracle::AbsDiff => {
                if x.len() == 1 {
                    (x[0] - y[0]).abs()
                } else {
                    x.iter()
                        .zip(y)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                }
            }
            Oracle::Max => x.iter().zip(y).map(|(a, b)| a.max(*b)).sum(),
            Oracle::ForwardExcess => x.iter().zip(y).map(|(a, b)| (a - b).max(0.0)).sum(),
            Oracle::Const(c) => *c,
            Oracle::Pow { base, exp } => power(base.eval(x, y), *exp),
            Oracle::Sum(terms) => terms.iter().map(|t| t.eval(x, y)).sum(),
            Oracle::Affine {
                scale,
                shift,
                inner,
            } => scale * inner.eval(x, y) + shift,
            Oracle::PartialToMetric(p) => 2.0 * p.eval(x, y) - (p.eval(x, x) + p.eval(y, y)),
            Oracle::Basepoint { metric, x0 } => {
                let x0 = x0.coords();
                0.5 * (metric.eval(x, y) + (metric.eval(x, x0) + metric.eval(y, x0)))
            }
            Oracle::InducedDp(p) => {
                if x == y {
                    0.0
                } else {
                    p.eval(x, y)
                }
            }
            Oracle::Custom(c) => (c.f)(x, y),
        }
    }

    /// True when the tree contains a custom node and so cannot be serialized.
    pub fn has_custom(&self) -> bool {
        match self {
            Oracle::Custom(_) => true,
            Oracle::Pow { base: inner, .. }
            | Oracle::Affine { inner, .. }
            | Oracle::PartialToMetric(inner)
            | Oracle::InducedDp(inner)
            | Oracle::Basepoint { metric: inner, .. } => inner.has_custom(),
            Oracle::Sum(terms) => terms.iter().any(Oracle::has_custom),
            Oracle::AbsDiff | Oracle::Max | Oracle::ForwardExcess | Oracle::Const(_) => false,
        }
    }
}

fn power(v: f64, exp: f64) -> f64 {
    if exp == 1.0 {
        v
    } else if exp == 2.0 {
        v * v
    } else if exp == 0.5 {
        v.sqrt()
    } else {
        v.powf(exp)
    }
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oracle::AbsDiff => write!(f, "|x-y|"),
            Oracle::Max => write!(f, "max{{x,y}}"),
            Oracle::ForwardExcess => write!(f, "max{{x-y,0}}"),
            Oracle::Const(c) => write!(f, "{c}"),
            Oracle::Pow { base, exp } => write!(f, "({base})^{exp}"),
            Oracle::Sum(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            Oracle::Affine {
                scale,
                shift,
                inner,
            } => write!(f, "{scale}*({inner}) + {shift}"),
            Oracle::PartialToMetric(p) => write!(f, "pt[{p}]"),
            Oracle::Basepoint { metric, x0 } => write!(f, "basepoint[{metric}; x0={x0}]"),
            Oracle::InducedDp(p) => write!(f, "dp[{p}]"),
            Oracle::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}
