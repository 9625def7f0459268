//! Binomial coefficients and the fair binomial pmf `C(k, j) 2^-k`.
//!
//! The float pmf uses Loader's saddle-point form
//!
//! ```text
//! pmf = exp(stirlerr(k) - stirlerr(j) - stirlerr(k-j) - bd0(j, k/2) - bd0(k-j, k/2))
//!       / sqrt(2 pi j (k-j) / k)
//! ```
//!
//! which keeps full relative precision for large `k`, where the naive
//! `ln C(k, j) - k ln 2` loses digits to cancellation.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Result};

pub const EXACT_PMF_CAP: u64 = 64;

/// `C(n, k)`, zero when `n < 0`, `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut c = BigUint::one();
    for i in 0..k {
        c *= n - i;
        c /= i + 1;
    }
    c
}

/// `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)`, the error of Stirling's formula.
pub fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n == 0 {
        return 0.0;
    }
    if n <= 15 {
        // n! is exact in f64 here
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        let x = n as f64;
        return fact.ln() - (x + 0.5) * x.ln() + x - 0.5 * (2.0 * PI).ln();
    }
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated by series near `x = np`.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `C(k, j) 2^-k` in floating point.
pub fn binomial_pmf(k: u64, j: u64) -> Result<f64> {
    if j > k {
        return domain(format!("successes {j} exceed trials {k}"));
    }
    Ok(fair_pmf(k, j))
}

pub(crate) fn fair_pmf(k: u64, j: u64) -> f64 {
    debug_assert!(j <= k);
    if j == 0 || j == k {
        return if k <= 1074 { 2f64.powi(-(k as i32)) } else { 0.0 };
    }
    let (kf, jf) = (k as f64, j as f64);
    let half = 0.5 * kf;
    let lc = stirlerr(k) - stirlerr(j) - stirlerr(k - j) - bd0(jf, half) - bd0(kf - jf, half);
    let lf = (2.0 * PI).ln() + jf.ln() + (-jf / kf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `C(k, j) 2^-k` as an exact rational, for `k <= 64`.
pub fn binomial_pmf_exact(k: u64, j: u64) -> Result<BigRational> {
    if j > k {
        return domain(format!("successes {j} exceed trials {k}"));
    }
    if k > EXACT_PMF_CAP {
        return Err(crate::error::Error::Resource {
            what: "exact binomial pmf trials",
            requested: k as usize,
            limit: EXACT_PMF_CAP as usize,
        });
    }
    Ok(BigRational::new(
        BigInt::from(binomial(k as i64, j as i64)),
        BigInt::one() << k,
    ))
}

/// Neumaier's compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn small_coefficients() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(-1, 0), BigUint::zero());
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(3, -1), BigUint::zero());
        assert_eq!(binomial(64, 32), BigUint::from(1_832_624_140_942_590_534u64));
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(binomial_pmf(1, 0).unwrap(), 0.5);
        assert!(rel(binomial_pmf(3, 1).unwrap(), 3.0 / 8.0) < 1e-14);
        assert_eq!(binomial_pmf_exact(1, 0).unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(binomial_pmf_exact(3, 1).unwrap(), BigRational::new(3.into(), 8.into()));
        assert!(binomial_pmf(2, 3).is_err());
        assert!(binomial_pmf_exact(65, 3).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn stirlerr_against_reference_values() {
        // published values of the Stirling error at integers
        let table = [
            (1, 0.0810614667953272582196702),
            (2, 0.0413406959554092940938221),
            (5, 0.01664469118982119216319487),
            (10, 0.008330563433362871256469318),
            (15, 0.005554733551962801371038690),
        ];
        for (n, want) in table {
            assert!((stirlerr(n) - want).abs() < 1e-14, "n={n}");
        }
        // series branches against the direct formula, in exact-ish arithmetic
        for n in [16u64, 36, 81, 501, 10_000] {
            let x = n as f64;
            let series = stirlerr(n);
            assert!(series > 0.0 && (series - 1.0 / (12.0 * x)).abs() < 1.0 / (300.0 * x * x * x));
        }
    }

    #[test]
    fn float_pmf_matches_exact_rationals() {
        for k in [1u64, 2, 7, 20, 63, 64, 150, 999, 2000] {
            for j in (0..=k).step_by((k as usize / 13).max(1)) {
                let exact = to_f64(&BigRational::new(
                    BigInt::from(binomial(k as i64, j as i64)),
                    BigInt::one() << k,
                ));
                let got = fair_pmf(k, j);
                // far tails lose ~1e-13 to cancellation inside bd0
                if exact > 1e-300 {
                    assert!(rel(got, exact) < 1e-12, "k={k} j={j} got={got} exact={exact}");
                }
            }
        }
    }

    #[test]
    fn central_term_scaling() {
        // C(2s-1, s-1) 2^-(2s-1) * sqrt(pi s) -> 1
        let s = 10_000u64;
        let v = binomial_pmf(2 * s - 1, s - 1).unwrap() * (PI * s as f64).sqrt();
        assert!((v - 1.0).abs() < 0.01);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(v), 2e-16);
    }
}
