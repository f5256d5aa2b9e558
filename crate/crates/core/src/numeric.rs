//! Exact probabilities and decimal formatting.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A probability in `[0, 1]`, held as an exact rational.
///
/// Decimal text such as `0.9` parses to exactly `9/10`; values built from
/// an `f64` keep the exact binary value of that float.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_negative() || value > BigRational::one() {
            return Err(Error::Domain(format!(
                "probability {value} is outside [0, 1]"
            )));
        }
        Ok(Probability(value))
    }

    pub fn ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Probability::new(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_f64(value: f64) -> Result<Self> {
        let exact = BigRational::from_float(value)
            .ok_or_else(|| Error::Domain(format!("probability {value} is not finite")))?;
        Probability::new(exact)
    }

    pub fn zero() -> Self {
        Probability(BigRational::zero())
    }

    pub fn one() -> Self {
        Probability(BigRational::one())
    }

    pub fn exact(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Probability::new(parse_rational(s)?)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parses `0.9`, `.95`, `1`, `1e-3`, `9/10` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let text = s.trim();
    let bad = || Error::Domain(format!("'{text}' is not a number"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (
            &text[..pos],
            text[pos + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Rounds half away from zero to `places` decimals, rendered with exactly
/// that many fractional digits.
pub fn round_decimal(value: &BigRational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = value * BigRational::from_integer(scale.clone());
    let negative = scaled.is_negative();
    let magnitude = scaled.abs();
    let (q, r) = magnitude.numer().div_rem(magnitude.denom());
    let twice_r: BigInt = r * 2;
    let rounded = if &twice_r >= magnitude.denom() {
        q + 1
    } else {
        q
    };
    let digits = rounded.to_string();
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = places + 1);
        let split = padded.len() - places;
        format!("{}.{}", &padded[..split], &padded[split..])
    };
    if negative && rounded_is_nonzero(&body) {
        format!("-{body}")
    } else {
        body
    }
}

fn rounded_is_nonzero(body: &str) -> bool {
    body.chars().any(|c| c.is_ascii_digit() && c != '0')
}

/// Formats like C's `%.{digits}g`: `digits` significant digits, trailing
/// zeros dropped, scientific notation only for very large or small values.
pub fn format_significant(value: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if value == 0.0 {
        return "0".into();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_fraction(&format!("{:.*}", decimals, value)).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Exact integer binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.9").unwrap(), q(9, 10));
        assert_eq!(parse_rational(".95").unwrap(), q(19, 20));
        assert_eq!(parse_rational("1").unwrap(), q(1, 1));
        assert_eq!(parse_rational("1.0").unwrap(), q(1, 1));
        assert_eq!(parse_rational("9/10").unwrap(), q(9, 10));
        assert_eq!(parse_rational("5e-1").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn probability_range() {
        assert!("1.01".parse::<Probability>().is_err());
        assert!("-0.1".parse::<Probability>().is_err());
        assert!(Probability::from_f64(f64::NAN).is_err());
        assert_eq!("0.5".parse::<Probability>().unwrap().to_f64(), 0.5);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_decimal(&q(124659, 125000), 6), "0.997272");
        assert_eq!(round_decimal(&q(1, 8), 2), "0.13");
        assert_eq!(round_decimal(&q(-1, 8), 2), "-0.13");
        assert_eq!(round_decimal(&q(1, 3), 0), "0");
        assert_eq!(round_decimal(&q(1, 1000), 2), "0.00");
        assert_eq!(round_decimal(&q(199, 100), 1), "2.0");
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.9815256, 6), "0.981526");
        assert_eq!(format_significant(1.0, 6), "1");
        assert_eq!(format_significant(0.5, 6), "0.5");
        assert_eq!(format_significant(377.659, 4), "377.7");
        assert_eq!(format_significant(1.5e-9, 3), "1.5e-9");
        assert_eq!(format_significant(0.0, 6), "0");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 4), BigUint::from(35u32));
        assert_eq!(binomial(64, 32), BigUint::from(1832624140942590534u64));
        assert_eq!(binomial(3, 4), BigUint::zero());
    }
}
