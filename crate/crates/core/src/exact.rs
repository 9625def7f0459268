//! Ground-truth solvers for the win/tie distribution after `n` flips.
//!
//! Two independent routes: exhaustive enumeration of all `2^n` sequences, and
//! a forward recurrence over states `(last flip, score)`. Transitions are
//!
//! ```text
//! (H, s) --H--> (H, s-1)     (H, s) --T--> (T, s+1)
//! (T, s) --H--> (H, s)       (T, s) --T--> (T, s)
//! ```
//!
//! After `k` flips the score lies in `[-(k-1), floor(k/2)]`.
//! A zero final score is a tie.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::rational::{check_probability, to_f64};
use crate::sequence::packed_score;

pub const ENUMERATION_CAP: usize = 30;
pub const EXACT_DP_CAP: usize = 5000;

/// Exact win/tie probabilities after `n` flips with head probability `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    pub n: usize,
    pub p: BigRational,
    pub p_a: BigRational,
    pub p_b: BigRational,
    pub p_tie: BigRational,
}

impl ExactDistribution {
    /// `P(B wins) - P(A wins)`.
    pub fn diff(&self) -> BigRational {
        &self.p_b - &self.p_a
    }

    pub fn to_float(&self) -> [f64; 3] {
        [to_f64(&self.p_a), to_f64(&self.p_b), to_f64(&self.p_tie)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatDistribution {
    pub n: usize,
    pub p: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_tie: f64,
    /// Absolute bound on the accumulated rounding error of each component.
    pub rounding_bound: f64,
}

impl FloatDistribution {
    pub fn diff(&self) -> f64 {
        self.p_b - self.p_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpMode {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Distribution {
    Exact(ExactDistribution),
    Float(FloatDistribution),
}

fn split_probability(p: &BigRational) -> (BigUint, BigUint, BigUint) {
    let a = p.numer().to_biguint().expect("p > 0");
    let b = p.denom().to_biguint().expect("denominator > 0");
    let c = &b - &a;
    (a, c, b)
}

fn finish(n: usize, p: &BigRational, num: [BigUint; 3], den: &BigUint) -> ExactDistribution {
    let den = BigInt::from(den.clone());
    let [a, b, t] = num.map(|x| BigRational::new(BigInt::from(x), den.clone()));
    ExactDistribution {
        n,
        p: p.clone(),
        p_a: a,
        p_b: b,
        p_tie: t,
    }
}

/// Sums `p^#H (1-p)^#T` over all `2^n` sequences, bucketed by the sign of
/// the final score.
pub fn enumerate_distribution(n: usize, p: &BigRational) -> Result<ExactDistribution> {
    if n == 0 {
        return domain("horizon n must be at least 1");
    }
    if n > ENUMERATION_CAP {
        return Err(Error::Resource {
            what: "enumeration horizon",
            requested: n,
            limit: ENUMERATION_CAP,
        });
    }
    check_probability(p)?;

    // counts[h][bucket]: bucket 0 = A leads, 1 = B leads, 2 = tie
    const CHUNK_BITS: usize = 16;
    let total = 1u64 << n;
    let chunk = 1u64 << CHUNK_BITS.min(n);
    let len = n as u32;
    let counts = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut local = vec![[0u64; 3]; n + 1];
            for bits in c * chunk..(c + 1) * chunk {
                let s = packed_score(bits, len);
                let bucket = match s {
                    s if s < 0 => 0,
                    s if s > 0 => 1,
                    _ => 2,
                };
                local[bits.count_ones() as usize][bucket] += 1;
            }
            local
        })
        .reduce(
            || vec![[0u64; 3]; n + 1],
            |mut acc, x| {
                for (a, b) in acc.iter_mut().zip(&x) {
                    for k in 0..3 {
                        a[k] += b[k];
                    }
                }
                acc
            },
        );

    let (a, c, b) = split_probability(p);
    let mut num = [BigUint::zero(), BigUint::zero(), BigUint::zero()];
    for (h, bucket) in counts.iter().enumerate() {
        let w = num_traits::pow(a.clone(), h) * num_traits::pow(c.clone(), n - h);
        for k in 0..3 {
            num[k] += &w * bucket[k];
        }
    }
    Ok(finish(n, p, num, &num_traits::pow(b, n)))
}

/// Exact forward recurrence over `(last flip, score)`. Weights are kept as
/// integer numerators over `den^steps`, where `p = num/den`.
struct ExactDp {
    steps: usize,
    a: BigUint,
    c: BigUint,
    unit_weights: bool,
    den_pow: BigUint,
    den: BigUint,
    // index = score + offset; one slot of padding on both sides
    heads: Vec<BigUint>,
    tails: Vec<BigUint>,
    next_heads: Vec<BigUint>,
    next_tails: Vec<BigUint>,
    offset: usize,
}

impl ExactDp {
    fn new(n_max: usize, p: &BigRational) -> Self {
        let (a, c, b) = split_probability(p);
        let offset = n_max + 1;
        let size = offset + n_max / 2 + 2;
        ExactDp {
            steps: 0,
            unit_weights: a.is_one() && c.is_one(),
            a,
            c,
            den_pow: BigUint::one(),
            den: b,
            heads: vec![BigUint::zero(); size],
            tails: vec![BigUint::zero(); size],
            next_heads: vec![BigUint::zero(); size],
            next_tails: vec![BigUint::zero(); size],
            offset,
        }
    }

    fn band(&self, k: usize) -> (usize, usize) {
        (self.offset + 1 - k, self.offset + k / 2)
    }

    fn step(&mut self) {
        if self.steps == 0 {
            self.heads[self.offset] = self.a.clone();
            self.tails[self.offset] = self.c.clone();
        } else {
            let (lo, hi) = self.band(self.steps + 1);
            for i in lo..=hi {
                let mut h = &self.heads[i + 1] + &self.tails[i];
                let mut t = &self.heads[i - 1] + &self.tails[i];
                if !self.unit_weights {
                    h *= &self.a;
                    t *= &self.c;
                }
                self.next_heads[i] = h;
                self.next_tails[i] = t;
            }
            std::mem::swap(&mut self.heads, &mut self.next_heads);
            std::mem::swap(&mut self.tails, &mut self.next_tails);
        }
        self.steps += 1;
        self.den_pow *= &self.den;
    }

    fn distribution(&self, p: &BigRational) -> ExactDistribution {
        let (lo, hi) = self.band(self.steps);
        let mut num = [BigUint::zero(), BigUint::zero(), BigUint::zero()];
        for i in lo..=hi {
            let bucket = match i.cmp(&self.offset) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Equal => 2,
            };
            num[bucket] += &self.heads[i];
            num[bucket] += &self.tails[i];
        }
        finish(self.steps, p, num, &self.den_pow)
    }
}

fn check_exact_horizon(n: usize) -> Result<()> {
    if n == 0 {
        return domain("horizon n must be at least 1");
    }
    if n > EXACT_DP_CAP {
        return Err(Error::Resource {
            what: "exact DP horizon",
            requested: n,
            limit: EXACT_DP_CAP,
        });
    }
    Ok(())
}

/// Exact distributions for every horizon `1..=n_max`, in order.
pub fn dp_exact_sweep(n_max: usize, p: &BigRational) -> Result<Vec<ExactDistribution>> {
    check_exact_horizon(n_max)?;
    check_probability(p)?;
    let mut dp = ExactDp::new(n_max, p);
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        dp.step();
        out.push(dp.distribution(p));
    }
    Ok(out)
}

pub fn dp_exact(n: usize, p: &BigRational) -> Result<ExactDistribution> {
    check_exact_horizon(n)?;
    check_probability(p)?;
    let mut dp = ExactDp::new(n, p);
    for _ in 0..n {
        dp.step();
    }
    Ok(dp.distribution(p))
}

/// Floating-point version of the same recurrence. Each step multiplies by
/// `p` or `1 - p`, so every intermediate stays in `[0, 1]`. Entries that
/// underflow to zero at the edges of the band are dropped from the sweep.
struct FloatDp {
    steps: usize,
    p: f64,
    q: f64,
    heads: Vec<f64>,
    tails: Vec<f64>,
    next_heads: Vec<f64>,
    next_tails: Vec<f64>,
    offset: usize,
    lo: usize,
    hi: usize,
    max_width: usize,
}

impl FloatDp {
    fn new(n_max: usize, p: f64) -> Self {
        let offset = n_max + 1;
        let size = offset + n_max / 2 + 2;
        FloatDp {
            steps: 0,
            p,
            q: 1.0 - p,
            heads: vec![0.0; size],
            tails: vec![0.0; size],
            next_heads: vec![0.0; size],
            next_tails: vec![0.0; size],
            offset,
            lo: offset,
            hi: offset,
            max_width: 1,
        }
    }

    fn step(&mut self) {
        if self.steps == 0 {
            self.heads[self.offset] = self.p;
            self.tails[self.offset] = self.q;
            self.steps = 1;
            return;
        }
        let k = self.steps + 1;
        let lo = (self.lo - 1).max(self.offset + 1 - k);
        let hi = (self.hi + 1).min(self.offset + k / 2);
        let (p, q) = (self.p, self.q);
        {
            let (h, t) = (&self.heads, &self.tails);
            let (nh, nt) = (&mut self.next_heads, &mut self.next_tails);
            for i in lo..=hi {
                nh[i] = p * (h[i + 1] + t[i]);
                nt[i] = q * (h[i - 1] + t[i]);
            }
        }
        // clear the stale band so padding reads see zeros next step
        for i in self.lo..=self.hi {
            self.heads[i] = 0.0;
            self.tails[i] = 0.0;
        }
        std::mem::swap(&mut self.heads, &mut self.next_heads);
        std::mem::swap(&mut self.tails, &mut self.next_tails);
        let (mut lo, mut hi) = (lo, hi);
        while lo < hi && self.heads[lo] == 0.0 && self.tails[lo] == 0.0 {
            lo += 1;
        }
        while hi > lo && self.heads[hi] == 0.0 && self.tails[hi] == 0.0 {
            hi -= 1;
        }
        self.lo = lo;
        self.hi = hi;
        self.max_width = self.max_width.max(hi - lo + 1);
        self.steps = k;
    }

    fn distribution(&self) -> FloatDistribution {
        let mut sums = [0.0f64; 3];
        for i in self.lo..=self.hi {
            let bucket = match i.cmp(&self.offset) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Equal => 2,
            };
            sums[bucket] += self.heads[i] + self.tails[i];
        }
        let n = self.steps as f64;
        // n steps of (add, multiply), summation over at most 3n/2 + 1 band
        // entries, plus the representation error of p itself
        let rounding_bound = 3.0 * (n + 1.0) * f64::EPSILON
            + n * self.max_width as f64 * f64::MIN_POSITIVE;
        FloatDistribution {
            n: self.steps,
            p: self.p,
            p_a: sums[0],
            p_b: sums[1],
            p_tie: sums[2],
            rounding_bound,
        }
    }
}

fn check_float_args(n: usize, p: f64) -> Result<()> {
    if n == 0 {
        return domain("horizon n must be at least 1");
    }
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("head probability must lie strictly between 0 and 1, got {p}"));
    }
    Ok(())
}

pub fn dp_float(n: usize, p: f64) -> Result<FloatDistribution> {
    check_float_args(n, p)?;
    let mut dp = FloatDp::new(n, p);
    for _ in 0..n {
        dp.step();
    }
    Ok(dp.distribution())
}

/// Float distributions for every horizon `1..=n_max`, in order.
pub fn dp_float_sweep(n_max: usize, p: f64) -> Result<Vec<FloatDistribution>> {
    check_float_args(n_max, p)?;
    let mut dp = FloatDp::new(n_max, p);
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        dp.step();
        out.push(dp.distribution());
    }
    Ok(out)
}

pub fn dp_distribution(n: usize, p: &BigRational, mode: DpMode) -> Result<Distribution> {
    match mode {
        DpMode::Exact => dp_exact(n, p).map(Distribution::Exact),
        DpMode::Float => {
            check_probability(p)?;
            dp_float(n, to_f64(p)).map(Distribution::Float)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::half;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn enumeration_small_values() {
        let d3 = enumerate_distribution(3, &half()).unwrap();
        assert_eq!(d3.diff(), r(1, 8));

        let d2 = enumerate_distribution(2, &half()).unwrap();
        assert_eq!((d2.p_a.clone(), d2.p_b.clone(), d2.p_tie.clone()), (r(1, 4), r(1, 4), r(1, 2)));

        let d4 = enumerate_distribution(4, &half()).unwrap();
        assert_eq!(d4.p_b, r(6, 16));
        assert_eq!(d4.p_a, r(4, 16));
        assert_eq!(d4.p_tie, r(6, 16));
    }

    #[test]
    fn enumeration_rejects_bad_input() {
        assert!(matches!(enumerate_distribution(31, &half()), Err(Error::Resource { .. })));
        assert!(matches!(enumerate_distribution(0, &half()), Err(Error::Domain(_))));
        assert!(enumerate_distribution(3, &r(1, 1)).is_err());
    }

    #[test]
    fn dp_single_flip_is_a_tie() {
        for p in [half(), r(1, 3), r(9, 10)] {
            let d = dp_exact(1, &p).unwrap();
            assert!(d.p_a.is_zero() && d.p_b.is_zero());
            assert!(d.p_tie.is_one());
        }
        let f = dp_float(1, 0.3).unwrap();
        assert_eq!((f.p_a, f.p_b, f.p_tie), (0.0, 0.0, 1.0));
    }

    #[test]
    fn dp_matches_enumeration_at_four() {
        assert_eq!(dp_exact(4, &half()).unwrap(), enumerate_distribution(4, &half()).unwrap());
    }

    #[test]
    fn dp_exact_sums_to_one_biased() {
        let sweep = dp_exact_sweep(40, &r(2, 7)).unwrap();
        for d in &sweep {
            assert!((&d.p_a + &d.p_b + &d.p_tie).is_one());
        }
    }

    #[test]
    fn dp_rejects_bad_input() {
        assert!(matches!(dp_exact(0, &half()), Err(Error::Domain(_))));
        assert!(matches!(dp_exact(EXACT_DP_CAP + 1, &half()), Err(Error::Resource { .. })));
        assert!(dp_float(0, 0.5).is_err());
        assert!(dp_float(5, 1.0).is_err());
        assert!(dp_float(5, f64::NAN).is_err());
    }

    #[test]
    fn float_band_trimming_keeps_mass() {
        let d = dp_float(5000, 0.5).unwrap();
        assert!((d.p_a + d.p_b + d.p_tie - 1.0).abs() <= d.rounding_bound);
    }

    #[test]
    fn float_sweep_matches_single_runs() {
        let sweep = dp_float_sweep(60, 0.45).unwrap();
        for n in [1usize, 2, 17, 60] {
            assert_eq!(sweep[n - 1], dp_float(n, 0.45).unwrap());
        }
    }
}
