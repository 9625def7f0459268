//! Helpers for exact probabilities.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Parses `num/den`, an integer, or a decimal such as `0.6` into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || crate::error::Error::Domain(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return domain("zero denominator");
        }
        return Ok(BigRational::new(n, d));
    }
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Ok(BigRational::new(num, den))
}

/// Requires `0 < p < 1`.
pub fn check_probability(p: &BigRational) -> Result<()> {
    if !p.is_positive() || *p >= BigRational::one() {
        return domain(format!("head probability must lie strictly between 0 and 1, got {}", format_rational(p)));
    }
    Ok(())
}

/// `num/den` in lowest terms; integers keep the `/1`.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn dyadic(numer: BigUint, log2_den: usize) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::one() << log2_den)
}

pub fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}
