//! Scalar types usable as edge weights and filtration values.
//!
//! Everything in the crate is generic over [`Scalar`]. The exact
//! [`BigRational`] instantiation is the default used by the CLI; the float
//! instantiations exist for quick exploratory runs and for plotting.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a number: {reason}")]
pub struct ScalarParseError {
    pub input: String,
    pub reason: &'static str,
}

impl ScalarParseError {
    fn new(input: &str, reason: &'static str) -> Self {
        Self {
            input: input.to_owned(),
            reason,
        }
    }
}

pub trait Scalar: Clone + PartialOrd + fmt::Debug + Num + Send + Sync + 'static {
    /// `true` when arithmetic and comparisons are exact.
    const EXACT: bool;

    /// `numer / denom`. Panics on a zero denominator.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn from_big_rational(value: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Accepts `"p/q"`, integers and plain decimals such as `"0.25"`.
    fn parse_scalar(s: &str) -> Result<Self, ScalarParseError>;

    /// Textual form that [`Scalar::parse_scalar`] reads back unchanged.
    fn render(&self) -> String;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

/// Parse a rational literal exactly: `p/q`, `p`, or a decimal `a.b`.
pub fn parse_big_rational(s: &str) -> Result<BigRational, ScalarParseError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ScalarParseError::new(s, "empty"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| ScalarParseError::new(s, "bad numerator"))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| ScalarParseError::new(s, "bad denominator"))?;
        if d.is_zero() {
            return Err(ScalarParseError::new(s, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.as_bytes()[0] {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ScalarParseError::new(s, "no digits"));
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(ScalarParseError::new(s, "unexpected character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits
            .parse()
            .map_err(|_| ScalarParseError::new(s, "bad digits"))?
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(numer.into(), denom.into())
    }

    fn from_big_rational(value: &BigRational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_scalar(s: &str) -> Result<Self, ScalarParseError> {
        parse_big_rational(s)
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for Rational64 {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational64::new(numer, denom)
    }

    fn from_big_rational(value: &BigRational) -> Self {
        let n = value.numer().to_i64().expect("numerator overflows i64");
        let d = value.denom().to_i64().expect("denominator overflows i64");
        Rational64::new(n, d)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn parse_scalar(s: &str) -> Result<Self, ScalarParseError> {
        let big = parse_big_rational(s)?;
        match (big.numer().to_i64(), big.denom().to_i64()) {
            (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
            _ => Err(ScalarParseError::new(s, "overflows i64 rational")),
        }
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_ratio(numer: i64, denom: i64) -> Self {
                assert!(denom != 0, "zero denominator");
                numer as $t / denom as $t
            }

            fn from_big_rational(value: &BigRational) -> Self {
                ToPrimitive::to_f64(value).unwrap_or(f64::NAN) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn parse_scalar(s: &str) -> Result<Self, ScalarParseError> {
                let t = s.trim();
                if t.contains('/') {
                    let r = parse_big_rational(t)?;
                    return Ok(Self::from_big_rational(&r));
                }
                t.parse::<$t>()
                    .map_err(|_| ScalarParseError::new(s, "bad float"))
            }

            fn render(&self) -> String {
                format!("{}", self)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// `value` as `"p/q"` even when the denominator is one. Used where a
/// fixed-shape rational string is wanted.
pub fn render_ratio(value: &BigRational) -> String {
    if value.denom().is_one() {
        format!("{}/1", value.numer())
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub(crate) fn is_strictly_positive_big(value: &BigRational) -> bool {
    Signed::is_positive(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_big_rational("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_big_rational(" 2/4 ").unwrap(), q(1, 2));
        assert_eq!(parse_big_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_big_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_big_rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_big_rational("7").unwrap(), q(7, 1));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "abc", "1.2.3", "1/x", "."] {
            assert!(parse_big_rational(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn render_round_trips() {
        for v in [q(1, 3), q(5, 1), q(-7, 12), q(0, 1)] {
            assert_eq!(BigRational::parse_scalar(&v.render()).unwrap(), v);
        }
        assert_eq!(render_ratio(&q(3, 1)), "3/1");
    }

    #[test]
    fn float_scalars_accept_fraction_syntax() {
        assert_eq!(f64::parse_scalar("1/4").unwrap(), 0.25);
        assert_eq!(f32::parse_scalar("0.5").unwrap(), 0.5);
        assert_eq!(
            Rational64::parse_scalar("3/6").unwrap(),
            Rational64::new(1, 2)
        );
    }
}
