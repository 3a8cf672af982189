//! Exact rational evaluation of `delta^s / (1 - delta^s)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Operands larger than this many bits fall back to floating point.
const MAX_BITS: u64 = 512;
/// Largest exponent numerator or denominator tried for an exact power.
const MAX_EXP_PART: u32 = 16;

/// `s` as `p / q` with small positive `p` and `q`, if it is one.
pub(crate) fn small_rational(s: f64) -> Option<(u32, u32)> {
    (1..=MAX_EXP_PART).find_map(|q| {
        let p = (s * q as f64).round();
        (p >= 1.0 && p <= MAX_EXP_PART as f64 && p / q as f64 == s).then_some((p as u32, q))
    })
}

fn exact_root(v: &BigInt, q: u32) -> Option<BigInt> {
    let r = v.nth_root(q);
    (num_traits::pow(r.clone(), q as usize) == *v).then_some(r)
}

/// `delta^s / (1 - delta^s)` as a rational, when `delta^s` is rational and
/// the operands are small enough. `None` otherwise.
pub(crate) fn rate_term(delta: &BigRational, s: f64) -> Option<BigRational> {
    if delta.is_negative() || delta.numer().bits() > MAX_BITS || delta.denom().bits() > MAX_BITS {
        return None;
    }
    let (p, q) = small_rational(s)?;
    let num = exact_root(&num_traits::pow(delta.numer().clone(), p as usize), q)?;
    let den = exact_root(&num_traits::pow(delta.denom().clone(), p as usize), q)?;
    if num >= den {
        return None;
    }
    let gap = &den - &num;
    if num.is_zero() {
        return Some(BigRational::zero());
    }
    Some(BigRational::new_raw(num, gap))
}

pub(crate) fn to_f64(r: &BigRational) -> Option<f64> {
    r.to_f64().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn detects_simple_exponents() {
        assert_eq!(small_rational(0.5), Some((1, 2)));
        assert_eq!(small_rational(1.0), Some((1, 1)));
        assert_eq!(small_rational(1.5), Some((3, 2)));
        assert_eq!(small_rational(std::f64::consts::PI), None);
    }

    #[test]
    fn square_root_of_square() {
        // delta = (1/(1+2^3))^2, s = 1/2 gives 1/9 / (8/9) = 1/8.
        let t = rate_term(&rat(1, 81), 0.5).unwrap();
        assert_eq!(t, rat(1, 8));
        assert!(rate_term(&rat(1, 2), 0.5).is_none());
        assert_eq!(rate_term(&rat(10, 21), 1.0).unwrap(), rat(10, 11));
        assert_eq!(rate_term(&rat(0, 1), 1.0).unwrap(), rat(0, 1));
    }
}
