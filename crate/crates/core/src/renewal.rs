//! Renewal counts, the renewal probabilities `pi_m`, and the asymptotic
//! constants of the game.
//!
//! `count_rx(m)` is the number of length-`m` sequences ending `HT` with
//! final score zero, i.e. the sequences in which an A-excursion ends at
//! epoch `m`. Splitting into runs gives
//!
//! ```text
//! count_rx(m) = sum_{s >= 1} C(m - 2s - 1, s - 1) C(2s - 1, s - 1)
//! ```
//!
//! and `pi_m = 2 * 2^-m * count_rx(m)`, because only half of the
//! A-excursion endpoints are kept by the slot-type coin. The difference
//! `P(B wins) - P(A wins)` after `n` flips is the convolution
//! `sum_{k=0}^{n-3} 2^-(k+1) pi_{n-k}`.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::binomial::{compensated_sum, fair_pmf};
use crate::error::{domain, Result};
use crate::montecarlo::{substream, FairBits};
use crate::rational::dyadic;

/// `1 / (2 sqrt(pi))`.
pub const C: f64 = 0.282_094_791_773_878_14;

/// Closed-form count of `{w in Omega_m : w ends HT, S(w) = 0}`.
pub fn count_rx(m: u64) -> BigUint {
    // term(s) = C(top, low) * C(2s - 1, s - 1) with top = m - 2s - 1,
    // low = s - 1; both factors are advanced by exact ratio updates
    let mut total = BigUint::zero();
    if m < 3 {
        return total;
    }
    let mut top = m - 3;
    let mut low = 0u64;
    let mut left = BigUint::one(); // C(m - 3, 0)
    let mut right = BigUint::one(); // C(1, 0)
    loop {
        total += &left * &right;
        // s -> s + 1: C(top - 2, low + 1) = C(top, low) (top-low)(top-low-1)(top-low-2) / (top (top-1) (low+1))
        if top < 2 || top - 2 < low + 1 {
            break;
        }
        let d = (top - low) as u128;
        left *= d * (d - 1) * (d - 2);
        left /= top as u128 * (top as u128 - 1) * (low as u128 + 1);
        // C(2s + 1, s) = C(2s - 1, s - 1) (2s)(2s + 1) / (s (s + 1)), s = low + 1
        let s = low + 1;
        right *= (2 * s as u128) * (2 * s as u128 + 1);
        right /= s as u128 * (s as u128 + 1);
        top -= 2;
        low += 1;
    }
    total
}

pub fn pi_exact(m: u64) -> BigRational {
    if m == 0 {
        return BigRational::zero();
    }
    dyadic(count_rx(m), m as usize - 1)
}

/// `pi_m = (1/2) sum_s b(m - 2s - 1, s - 1) b(2s - 1, s - 1)` with
/// `b(k, j) = C(k, j) 2^-k`, each factor evaluated in log space.
pub fn pi_float(m: u64) -> f64 {
    if m < 3 {
        return 0.0;
    }
    let max_s = (m + 1) / 3;
    let terms = (1..=max_s).filter_map(|s| {
        let (k1, j) = (m.checked_sub(2 * s + 1)?, s - 1);
        (j <= k1).then(|| fair_pmf(k1, j) * fair_pmf(2 * s - 1, j))
    });
    0.5 * compensated_sum(terms)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PiValue {
    Exact(BigRational),
    Float(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiMode {
    Exact,
    Float,
}

pub fn pi(m: u64, mode: PiMode) -> PiValue {
    match mode {
        PiMode::Exact => PiValue::Exact(pi_exact(m)),
        PiMode::Float => PiValue::Float(pi_float(m)),
    }
}

/// `sum_{k=0}^{n-3} 2^-(k+1) pi_{n-k}`, exactly.
pub fn renewal_diff(n: u64) -> Result<BigRational> {
    if n < 3 {
        return domain(format!("renewal difference needs n >= 3, got {n}"));
    }
    let mut total = BigRational::zero();
    for k in 0..=n - 3 {
        let weight = BigRational::new(BigInt::one(), BigInt::one() << (k + 1));
        total += weight * pi_exact(n - k);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalRow {
    pub m: u64,
    pub count_rx: BigUint,
    pub pi_exact: BigRational,
    pub pi_float: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalTable {
    pub m_from: u64,
    pub m_to: u64,
    pub rows: Vec<RenewalRow>,
}

pub fn renewal_table(m_from: u64, m_to: u64) -> Result<RenewalTable> {
    if m_from == 0 || m_from > m_to {
        return domain(format!("invalid range {m_from}..={m_to}"));
    }
    let rows = (m_from..=m_to)
        .into_par_iter()
        .map(|m| {
            let count = count_rx(m);
            RenewalRow {
                m,
                pi_exact: dyadic(count.clone(), m as usize - 1),
                count_rx: count,
                pi_float: pi_float(m),
            }
        })
        .collect();
    Ok(RenewalTable { m_from, m_to, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub n: u64,
    pub c: f64,
    /// `c / sqrt(n)`, leading order of `P(B wins) - P(A wins)`.
    pub diff_approx: f64,
    /// `2c / sqrt(n)`, leading order of the tie probability.
    pub tie_approx: f64,
    /// `c / (2 sqrt(n))`, leading order of `1/2 - P(B wins)`.
    pub deficit_b: f64,
    /// `3c / (2 sqrt(n))`, leading order of `1/2 - P(A wins)`.
    pub deficit_a: f64,
}

pub fn asymptotics(n: u64) -> Result<AsymptoticReport> {
    if n == 0 {
        return domain("horizon n must be at least 1");
    }
    let d = C / (n as f64).sqrt();
    Ok(AsymptoticReport {
        n,
        c: C,
        diff_approx: d,
        tie_approx: 2.0 * d,
        deficit_b: 0.5 * d,
        deficit_a: 1.5 * d,
    })
}

/// The walk observed at successive tails: each step adds
/// `(2 - R) 1[R >= 1]`, where `R` is the number of heads before the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkReport {
    pub steps: u64,
    pub seed: u64,
    pub zero_hits: u64,
    pub final_position: i64,
    pub sample_mean_jump: f64,
    pub sample_std_jump: f64,
}

pub fn tailwalk(steps: u64, seed: u64) -> Result<WalkReport> {
    if steps == 0 {
        return domain("steps must be at least 1");
    }
    let mut rng = substream(seed, 0);
    let mut bits = FairBits::new(&mut rng);
    let (mut pos, mut zero_hits) = (0i64, 0u64);
    let (mut sum, mut sum_sq) = (0i64, 0i128);
    for _ in 0..steps {
        let mut run = 0i64;
        while bits.flip() {
            run += 1;
        }
        let jump = if run >= 1 { 2 - run } else { 0 };
        pos += jump;
        sum += jump;
        sum_sq += (jump * jump) as i128;
        if pos == 0 {
            zero_hits += 1;
        }
    }
    let n = steps as f64;
    let mean = sum as f64 / n;
    let var = if steps > 1 {
        (sum_sq as f64 - n * mean * mean) / (n - 1.0)
    } else {
        0.0
    };
    Ok(WalkReport {
        steps,
        seed,
        zero_hits,
        final_position: pos,
        sample_mean_jump: mean,
        sample_std_jump: var.max(0.0).sqrt(),
    })
}

/// `sum_{r=1}^{terms} (2 - r)^power 2^-(r+1)`: the first two moments of
/// the jump law, truncated.
pub fn jump_moment_truncated(terms: u32, power: u32) -> BigRational {
    let mut total = BigRational::zero();
    for r in 1..=terms as i64 {
        let v = num_traits::pow(BigInt::from(2 - r), power as usize);
        total += BigRational::new(v, BigInt::one() << (r + 1));
    }
    total
}

/// `sqrt(pi s) P(Bin(2s - 1, 1/2) = s - 1)`, which tends to 1.
pub fn central_binomial_ratio(s: u64) -> f64 {
    fair_pmf(2 * s - 1, s - 1) * (PI * s as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, to_f64};
    use num_traits::ToPrimitive;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn count_examples() {
        let got: Vec<u64> = (1..=6).map(|m| count_rx(m).to_u64().unwrap()).collect();
        assert_eq!(got, vec![0, 0, 1, 1, 1, 4]);
    }

    #[test]
    fn count_matches_direct_binomials() {
        use crate::binomial::binomial;
        for m in 1..120i64 {
            let direct: BigUint = (1..=m)
                .map(|s| binomial(m - 2 * s - 1, s - 1) * binomial(2 * s - 1, s - 1))
                .sum();
            assert_eq!(count_rx(m as u64), direct, "m={m}");
        }
    }

    #[test]
    fn pi_examples() {
        assert_eq!(pi_exact(3), r(1, 4));
        assert_eq!(pi_exact(4), r(1, 8));
        assert_eq!(pi_exact(2), r(0, 1));
        assert_eq!(pi_float(3), 0.25);
        assert_eq!(pi(4, PiMode::Exact), PiValue::Exact(r(1, 8)));
    }

    #[test]
    fn pi_float_agrees_with_exact() {
        for m in 3..=200u64 {
            let exact = to_f64(&pi_exact(m));
            let got = pi_float(m);
            assert!(((got - exact) / exact).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn pi_float_holds_precision_at_large_m() {
        // pi_m sqrt(m) / c = 1 - a1/m + a2/m^2 + ...; a1 fitted at m = 2000 from the
        // exact count, then the fit must carry to m = 10^6 to well below 1e-9
        let m0 = 2000u64;
        let r0 = to_f64(&pi_exact(m0)) * (m0 as f64).sqrt() / C;
        let a1 = (1.0 - r0) * m0 as f64;
        assert!((a1 - 0.5625).abs() < 1e-4, "a1 = {a1}");
        let m = 1_000_000u64;
        let ratio = pi_float(m) * (m as f64).sqrt() / C;
        let predicted = 1.0 - 0.5625 / m as f64;
        assert!((ratio - predicted).abs() < 1e-10, "ratio {ratio} predicted {predicted}");
    }

    #[test]
    fn renewal_diff_examples() {
        assert_eq!(renewal_diff(3).unwrap(), r(1, 8));
        assert_eq!(renewal_diff(4).unwrap(), r(1, 8));
        assert_eq!(renewal_diff(5).unwrap(), r(3, 32));
        assert!(renewal_diff(2).is_err());
    }

    #[test]
    fn renewal_diff_matches_dp_small() {
        let sweep = crate::exact::dp_exact_sweep(40, &half()).unwrap();
        for n in 3..=40u64 {
            assert_eq!(renewal_diff(n).unwrap(), sweep[n as usize - 1].diff(), "n={n}");
        }
    }

    #[test]
    fn asymptotic_report_identities() {
        let a = asymptotics(100).unwrap();
        assert!((a.diff_approx - 0.0282).abs() < 1e-4);
        assert_eq!(a.tie_approx, 2.0 * a.diff_approx);
        assert_eq!(a.deficit_a, 3.0 * a.deficit_b);
        assert_eq!(a.deficit_a + a.deficit_b, a.tie_approx);
        assert_eq!(asymptotics(1).unwrap().diff_approx, C);
        assert!((C - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-16);
        assert!(asymptotics(0).is_err());
    }

    #[test]
    fn jump_law_moments() {
        let mean = jump_moment_truncated(60, 1);
        assert!(to_f64(&mean).abs() <= 2f64.powi(-50));
        let var = to_f64(&jump_moment_truncated(200, 2));
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn walk_is_deterministic() {
        assert_eq!(tailwalk(10_000, 5).unwrap(), tailwalk(10_000, 5).unwrap());
        assert!(tailwalk(0, 5).is_err());
    }

    #[test]
    fn table_rows_are_consistent() {
        let t = renewal_table(1, 30).unwrap();
        assert_eq!(t.rows.len(), 30);
        for row in &t.rows {
            assert_eq!(row.pi_exact, pi_exact(row.m));
        }
        assert!(renewal_table(5, 4).is_err());
        assert!(renewal_table(0, 4).is_err());
    }
}
