//! Direct simulation of the game with reproducible seeding.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A run with
//! seed `K` splits its trials into batches of `batch_size`; batch `i` draws
//! from `ChaCha8Rng::seed_from_u64(K)` with its stream set to `i`. Batches
//! run in parallel and their counts are summed, so a result depends only on
//! `(seed, trials, batch_size)` and not on the number of worker threads.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::sequence::{low_mask, packed_pair_counts};

pub const DEFAULT_BATCH_SIZE: u64 = 10_000;

/// The generator for batch `batch` of a run seeded with `seed`.
pub fn substream(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Runs `trials` trials in batches and returns per-batch results in batch
/// order. `per_batch` receives the batch generator and its trial count.
pub fn run_batches<T, F>(trials: u64, batch_size: u64, seed: u64, per_batch: F) -> T
where
    T: Send + std::iter::Sum<T>,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let batch_size = batch_size.max(1);
    let batches = trials.div_ceil(batch_size);
    let parts: Vec<T> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = batch_size.min(trials - b * batch_size);
            per_batch(&mut substream(seed, b), count)
        })
        .collect();
    parts.into_iter().sum()
}

/// Fair coin flips drawn 64 at a time from a generator.
pub struct FairBits<'a, R> {
    rng: &'a mut R,
    buf: u64,
    left: u32,
}

impl<'a, R: RngCore> FairBits<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        FairBits { rng, buf: 0, left: 0 }
    }

    /// `true` for heads.
    #[inline]
    pub fn flip(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        bit
    }

    /// Number of tails before the next head; geometric with mean 1.
    pub fn tails_before_head(&mut self) -> u64 {
        let mut count = 0u64;
        loop {
            if self.left == 0 {
                self.buf = self.rng.next_u64();
                self.left = 64;
            }
            if self.buf == 0 {
                count += self.left as u64;
                self.left = 0;
                continue;
            }
            let tz = self.buf.trailing_zeros();
            count += tz as u64;
            self.buf = self.buf.checked_shr(tz + 1).unwrap_or(0);
            self.left -= tz + 1;
            return count;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub batch_size: u64,
}

impl SimConfig {
    pub fn new(n: usize, trials: u64, seed: u64) -> Self {
        SimConfig {
            n,
            p: 0.5,
            trials,
            seed,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("horizon n must be at least 1");
        }
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if self.batch_size == 0 {
            return domain("batch size must be at least 1");
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return domain(format!("head probability must lie strictly between 0 and 1, got {}", self.p));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub batch_size: u64,
    /// Games won by A, won by B, tied; these partition `trials`.
    pub wins_a: u64,
    pub wins_b: u64,
    pub ties: u64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_tie: f64,
    pub stderr_a: f64,
    pub stderr_b: f64,
    pub stderr_tie: f64,
}

impl SimResult {
    pub fn diff(&self) -> f64 {
        self.p_b - self.p_a
    }

    /// Standard error of `p_b - p_a`, which are negatively correlated.
    pub fn diff_stderr(&self) -> f64 {
        let d = self.diff();
        ((self.p_a + self.p_b - d * d) / self.trials as f64).sqrt()
    }
}

#[derive(Default)]
struct Tally([u64; 3]);

impl std::iter::Sum for Tally {
    fn sum<I: Iterator<Item = Tally>>(iter: I) -> Self {
        iter.fold(Tally::default(), |mut acc, t| {
            for k in 0..3 {
                acc.0[k] += t.0[k];
            }
            acc
        })
    }
}

fn bucket(hh: u64, ht: u64) -> usize {
    match ht.cmp(&hh) {
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Equal => 2,
    }
}

/// One fair game, consuming 64 flips per generator word.
fn fair_game<R: RngCore>(rng: &mut R, n: usize) -> usize {
    let (mut hh, mut ht) = (0u64, 0u64);
    let mut last_head = false;
    let mut remaining = n;
    let mut first = true;
    while remaining > 0 {
        let w = remaining.min(64);
        let bits = rng.next_u64() & low_mask(w);
        let (a, b) = packed_pair_counts(bits, w as u32);
        hh += a as u64;
        ht += b as u64;
        if !first && last_head {
            if bits & 1 == 1 {
                hh += 1;
            } else {
                ht += 1;
            }
        }
        last_head = (bits >> (w - 1)) & 1 == 1;
        first = false;
        remaining -= w;
    }
    bucket(hh, ht)
}

fn biased_game<R: Rng>(rng: &mut R, n: usize, coin: &Bernoulli) -> usize {
    let (mut hh, mut ht) = (0u64, 0u64);
    let mut last_head = false;
    for _ in 0..n {
        let h = coin.sample(rng);
        if last_head {
            if h {
                hh += 1;
            } else {
                ht += 1;
            }
        }
        last_head = h;
    }
    bucket(hh, ht)
}

pub fn simulate_game(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let n = config.n;
    let coin = Bernoulli::new(config.p).map_err(|e| crate::error::Error::Domain(e.to_string()))?;
    let fair = config.p == 0.5;
    let tally: Tally = run_batches(config.trials, config.batch_size, config.seed, |rng, count| {
        let mut t = Tally::default();
        for _ in 0..count {
            let b = if fair { fair_game(rng, n) } else { biased_game(rng, n, &coin) };
            t.0[b] += 1;
        }
        t
    });
    let trials = config.trials as f64;
    let est = |c: u64| c as f64 / trials;
    let se = |q: f64| (q * (1.0 - q) / trials).sqrt();
    let [a, b, t] = tally.0;
    Ok(SimResult {
        n,
        p: config.p,
        trials: config.trials,
        seed: config.seed,
        batch_size: config.batch_size,
        wins_a: a,
        wins_b: b,
        ties: t,
        p_a: est(a),
        p_b: est(b),
        p_tie: est(t),
        stderr_a: se(est(a)),
        stderr_b: se(est(b)),
        stderr_tie: se(est(t)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_flip_always_ties() {
        for p in [0.5, 0.2] {
            let r = simulate_game(&SimConfig::new(1, 5000, 3).with_p(p)).unwrap();
            assert_eq!(r.ties, 5000);
            assert_eq!(r.p_tie, 1.0);
        }
    }

    #[test]
    fn counts_partition_trials() {
        let r = simulate_game(&SimConfig::new(77, 12_345, 9)).unwrap();
        assert_eq!(r.wins_a + r.wins_b + r.ties, 12_345);
    }

    #[test]
    fn deterministic_given_config() {
        let cfg = SimConfig::new(130, 50_000, 42);
        assert_eq!(simulate_game(&cfg).unwrap(), simulate_game(&cfg).unwrap());
        let other = simulate_game(&SimConfig::new(130, 50_000, 43)).unwrap();
        assert_ne!(simulate_game(&cfg).unwrap(), other);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(simulate_game(&SimConfig::new(0, 10, 0)).is_err());
        assert!(simulate_game(&SimConfig::new(5, 0, 0)).is_err());
        assert!(simulate_game(&SimConfig::new(5, 10, 0).with_p(1.0)).is_err());
    }

    #[test]
    fn fair_word_game_matches_flip_by_flip_scoring() {
        // same generator words, scored bit by bit through FlipSequence
        for n in [2usize, 63, 64, 65, 130] {
            for seed in 0..20 {
                let mut rng = substream(seed, 0);
                let got = fair_game(&mut rng, n);
                let mut rng = substream(seed, 0);
                let mut seq = crate::FlipSequence::new();
                let mut left = n;
                while left > 0 {
                    let w = rng.next_u64();
                    for i in 0..left.min(64) {
                        seq.push(if (w >> i) & 1 == 1 { crate::Flip::H } else { crate::Flip::T });
                    }
                    left -= left.min(64);
                }
                let want = match seq.score() {
                    s if s < 0 => 0,
                    s if s > 0 => 1,
                    _ => 2,
                };
                assert_eq!(got, want, "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn geometric_tails_have_mean_one() {
        let mut rng = substream(7, 0);
        let mut bits = FairBits::new(&mut rng);
        let total: u64 = (0..200_000).map(|_| bits.tails_before_head()).sum();
        let mean = total as f64 / 200_000.0;
        // sd of the geometric count is sqrt(2)
        assert!((mean - 1.0).abs() < 5.0 * 2f64.sqrt() / 200_000f64.sqrt());
    }
}
