use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
enum PhiKind {
    Identity,
    Sqrt,
    Power(f64),
    Custom(Arc<ScalarFn>),
}

/// A continuous, non-decreasing, sub-additive function on `[0, ∞)` that
/// is homogeneous of degree `s` and vanishes only at zero.
///
/// Custom functions are sampled against each property on construction.
#[derive(Clone)]
pub struct PhiFunction {
    label: String,
    degree: f64,
    kind: PhiKind,
}

impl PhiFunction {
    pub fn identity() -> Self {
        PhiFunction {
            label: "x".into(),
            degree: 1.0,
            kind: PhiKind::Identity,
        }
    }

    pub fn sqrt() -> Self {
        PhiFunction {
            label: "sqrt(x)".into(),
            degree: 0.5,
            kind: PhiKind::Sqrt,
        }
    }

    /// `x^s`; sub-additive only for `0 < s <= 1`.
    pub fn power(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::rejected(format!("x^{s} is sub-additive only for 0 < s <= 1")));
        }
        Ok(match s {
            1.0 => Self::identity(),
            0.5 => Self::sqrt(),
            _ => PhiFunction {
                label: format!("x^{s}"),
                degree: s,
                kind: PhiKind::Power(s),
            },
        })
    }

    pub fn custom<F>(label: impl Into<String>, degree: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let phi = PhiFunction {
            label: label.into(),
            degree,
            kind: PhiKind::Custom(Arc::new(f)),
        };
        phi.verify()?;
        Ok(phi)
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "identity" | "id" => Ok(Self::identity()),
            "sqrt" => Ok(Self::sqrt()),
            other => match other.strip_prefix("pow:") {
                Some(s) => Self::power(
                    s.parse()
                        .map_err(|_| Error::rejected(format!("bad exponent in `{other}`")))?,
                ),
                None => Err(Error::rejected(format!("unknown function `{other}`"))),
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            PhiKind::Identity => x,
            PhiKind::Sqrt => x.sqrt(),
            PhiKind::Power(s) => x.powf(*s),
            PhiKind::Custom(f) => f(x),
        }
    }

    /// Samples every defining property on a grid over `[0, 10]`.
    pub fn verify(&self) -> Result<()> {
        let s = self.degree;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::rejected(format!("degree {s} must be positive")));
        }
        let fail = |what: String| Err(Error::rejected(format!("{} is not admissible: {what}", self.label)));
        if self.eval(0.0) != 0.0 {
            return fail("F(0) != 0".into());
        }
        let grid: Vec<f64> = (1..=400).map(|i| i as f64 / 40.0).collect();
        let vals: Vec<f64> = grid.iter().map(|x| self.eval(*x)).collect();
        if let Some(x) = grid.iter().zip(&vals).find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return fail(format!("F({}) is not positive", x.0));
        }
        if vals.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return fail("not non-decreasing".into());
        }
        for (i, a) in grid.iter().enumerate().step_by(7) {
            for b in grid.iter().skip(i).step_by(11) {
                if self.eval(a + b) > self.eval(*a) + self.eval(*b) + 1e-9 {
                    return fail(format!("F({a} + {b}) > F({a}) + F({b})"));
                }
            }
        }
        for x in grid.iter().step_by(13) {
            for a in [0.25f64, 0.5, 2.0, 3.0] {
                let want = a.powf(s) * self.eval(*x);
                if (self.eval(a * x) - want).abs() > 1e-9 * want.abs().max(1.0) {
                    return fail(format!("F({a} * {x}) != {a}^{s} F({x})"));
                }
            }
        }
        // Halving the mesh must shrink the largest jump between neighbours.
        let jump = |h: f64| {
            (0..(1.0 / h) as usize)
                .map(|k| (self.eval((k + 1) as f64 * h) - self.eval(k as f64 * h)).abs())
                .fold(0.0, f64::max)
        };
        if jump(1.0 / 2048.0) > 0.99 * jump(1.0 / 1024.0) + 1e-12 {
            return fail("largest jump does not shrink with the mesh".into());
        }
        Ok(())
    }
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFunction")
            .field("label", &self.label)
            .field("degree", &self.degree)
            .finish()
    }
}

/// A non-negative function of 2 or 3 arguments that vanishes only when
/// all arguments vanish.
#[derive(Clone)]
pub struct PsiFunction {
    label: String,
    arity: usize,
    f: Arc<VectorFn>,
}

impl PsiFunction {
    pub fn new<F>(label: impl Into<String>, arity: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let psi = PsiFunction {
            label: label.into(),
            arity,
            f: Arc::new(f),
        };
        psi.verify()?;
        Ok(psi)
    }

    pub fn sum(arity: usize) -> Result<Self> {
        Self::new("sum", arity, |a| a.iter().sum())
    }

    pub fn max(arity: usize) -> Result<Self> {
        Self::new("max", arity, |a| a.iter().copied().fold(0.0, f64::max))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        (self.f)(args)
    }

    fn verify(&self) -> Result<()> {
        if !(self.arity == 2 || self.arity == 3) {
            return Err(Error::rejected(format!("ψ arity must be 2 or 3, got {}", self.arity)));
        }
        if self.eval(&vec![0.0; self.arity]) != 0.0 {
            return Err(Error::rejected(format!("{} does not vanish at zero", self.label)));
        }
        let levels = [0.0, 1e-3, 0.5, 2.0];
        let mut args = vec![0.0; self.arity];
        let total = levels.len().pow(self.arity as u32);
        for mut idx in 1..total {
            for a in args.iter_mut() {
                *a = levels[idx % levels.len()];
                idx /= levels.len();
            }
            let v = self.eval(&args);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::rejected(format!("{} vanishes at {args:?}", self.label)));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiFunction")
            .field("label", &self.label)
            .field("arity", &self.arity)
            .finish()
    }
}
