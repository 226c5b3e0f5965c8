//! Scalar types usable as tropical matrix entries.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Entry type of a tropical matrix: an ordered field element that can be
/// parsed from decimal text and converted to `f64`.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Parses `"-1.25"`, `"3e-2"`, `"1/3"` and friends. A Unicode minus is accepted.
    fn parse_decimal(text: &str) -> Option<Self>;

    fn is_finite_value(&self) -> bool {
        true
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational {
    fn parse_decimal(text: &str) -> Option<Self> {
        parse_rational(text)
    }
}

impl Scalar for f64 {
    fn parse_decimal(text: &str) -> Option<Self> {
        let t = text.trim().replace('\u{2212}', "-");
        if let Some((p, q)) = t.split_once('/') {
            let (p, q): (f64, f64) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
            return (q != 0.0).then(|| p / q).filter(|v| v.is_finite());
        }
        t.parse::<f64>().ok().filter(|v| v.is_finite())
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

const MAX_EXPONENT: i64 = 4096;

fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim().replace('\u{2212}', "-");
    if t.contains('/') {
        let (p, q) = t.split_once('/')?;
        let (p, q) = (parse_rational(p)?, parse_rational(q)?);
        return (!q.is_zero()).then(|| p / q);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i64>().ok()?),
        None => (t.as_str(), 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let scale = exponent - frac_part.len() as i64;
    if scale.abs() > MAX_EXPONENT {
        return None;
    }
    let digits = BigInt::from_str_radix(&format!("0{int_part}{frac_part}"), 10).ok()?;
    let ten_pow = num_traits::pow(BigInt::from(10), scale.unsigned_abs() as usize);
    let value = if scale >= 0 {
        Rational::from_integer(digits * ten_pow)
    } else {
        Rational::new(digits, ten_pow)
    };
    Some(if negative { -value } else { value })
}

pub(crate) fn max_ref<'a, T: PartialOrd>(a: &'a T, b: &'a T) -> &'a T {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn min_ref<'a, T: PartialOrd>(a: &'a T, b: &'a T) -> &'a T {
    if b < a {
        b
    } else {
        a
    }
}

/// Integer `n` as a scalar.
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("small integers are representable")
}

/// Rational `p/q` from machine integers.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_forms() {
        assert_eq!(parse_rational("-1.5"), Some(ratio(-3, 2)));
        assert_eq!(parse_rational("\u{2212}0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse_rational("2"), Some(ratio(2, 1)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1e-3"), Some(ratio(1, 1000)));
        assert_eq!(parse_rational("1.5E2"), Some(ratio(150, 1)));
        assert_eq!(parse_rational("1/3"), Some(ratio(1, 3)));
        assert_eq!(parse_rational("-2/6"), Some(ratio(-1, 3)));
        assert_eq!(parse_rational("0.1"), Some(ratio(1, 10)));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "-", ".", "abc", "1.2.3", "1/0", "1e99999", "nan", "inf", "1 2"] {
            assert_eq!(parse_rational(bad), None, "{bad:?}");
        }
    }

    #[test]
    fn float_parse() {
        assert_eq!(f64::parse_decimal("1/4"), Some(0.25));
        assert_eq!(f64::parse_decimal("\u{2212}3"), Some(-3.0));
        assert_eq!(f64::parse_decimal("inf"), None);
    }
}
