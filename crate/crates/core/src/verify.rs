//! Self-check suite behind `coinrace verify`.
//!
//! Each check compares a solver against an independent route (exhaustive
//! enumeration, pair scans, brute-force counts) or against a limit law at a
//! fixed tolerance, and reports pass/fail with a short detail line.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{dp_exact_sweep, dp_float, dp_float_sweep, enumerate_distribution};
use crate::excursions::{
    classify_excursion, coupled_diff_mc, decompose, enumerate_excursions, ExcursionKind, PositionClass, SlotKind,
};
use crate::montecarlo::{simulate_game, substream, SimConfig};
use crate::rational::{half, to_f64};
use crate::renewal::{
    asymptotics, count_rx, jump_moment_truncated, pi_exact, pi_float, renewal_diff, tailwalk, C,
};
use crate::sequence::{packed_score, Flip, FlipSequence, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn check(name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check { name, passed, detail }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_sequences(max_len: usize) -> impl Iterator<Item = FlipSequence> {
    (1..=max_len).flat_map(|n| (0..1u64 << n).map(move |b| FlipSequence::from_bits(b, n)))
}

fn random_sequence<R: RngCore>(rng: &mut R, len: usize) -> FlipSequence {
    (0..len).map(|_| if rng.next_u32() & 1 == 1 { Flip::H } else { Flip::T }).collect()
}

/// Scores by scanning adjacent pairs one at a time.
fn pair_scan_score(seq: &FlipSequence) -> i64 {
    let flips: Vec<Flip> = seq.iter().collect();
    flips
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Flip::H, Flip::T) => 1,
            (Flip::H, Flip::H) => -1,
            _ => 0,
        })
        .sum()
}

fn sign_class(s: i64) -> PositionClass {
    match s {
        s if s > 0 => PositionClass::BWinning,
        s if s < 0 => PositionClass::AWinning,
        _ => PositionClass::NeutralZero,
    }
}

fn brute_count_rx(m: u32) -> u64 {
    if m < 2 {
        return 0;
    }
    // flip m-1 is H (bit m-2), flip m is T (bit m-1 clear)
    let prefix_bits = m - 2;
    (0..1u64 << prefix_bits)
        .into_par_iter()
        .filter(|&lo| packed_score(lo | (1 << (m - 2)), m) == 0)
        .count() as u64
}

pub fn run_all(level: Level) -> Vec<Check> {
    let full = level == Level::Full;
    let mut out = Vec::new();

    // sequence
    out.push(check("core: run-count score equals pair-scan score", || {
        let mut n = 0usize;
        for s in all_sequences(16) {
            ensure(s.score_via_runs() == s.score_series().last().unwrap_or(0), || format!("mismatch at {s}"))?;
            n += 1;
        }
        let mut rng = substream(11, 0);
        let samples = if full { 100_000 } else { 10_000 };
        for _ in 0..samples {
            let len = rng.random_range(17..=300);
            let s = random_sequence(&mut rng, len);
            ensure(s.score_via_runs() == pair_scan_score(&s), || format!("mismatch at {s}"))?;
        }
        Ok(format!("{n} exhaustive + {samples} random sequences"))
    }));

    out.push(check("core: score series agrees with pair scan on every prefix", || {
        let mut rng = substream(12, 0);
        for _ in 0..2000 {
            let s = random_sequence(&mut rng, 64);
            let series = s.score_series();
            for k in 1..=s.len() {
                let prefix = s.slice(0, k);
                ensure(series.at(k) == pair_scan_score(&prefix), || format!("S_{k} wrong for {s}"))?;
            }
        }
        Ok("2000 random sequences of length 64".into())
    }));

    out.push(check("core: reversal preserves HH and swaps HT with TH", || {
        for s in all_sequences(16) {
            let r = s.reverse();
            ensure(
                r.count_overlapping(Pattern::HH) == s.count_overlapping(Pattern::HH)
                    && r.count_overlapping(Pattern::TH) == s.count_overlapping(Pattern::HT)
                    && r.reverse() == s,
                || format!("reversal law fails at {s}"),
            )?;
        }
        Ok("all sequences up to length 16".into())
    }));

    out.push(check("core: reversal preserves the score of sequences starting and ending with H", || {
        let mut n = 0;
        for s in all_sequences(16).filter(|s| s.first() == Some(Flip::H) && s.last() == Some(Flip::H)) {
            ensure(s.reverse().score() == s.score(), || format!("score changes under reversal at {s}"))?;
            n += 1;
        }
        Ok(format!("{n} sequences"))
    }));

    out.push(check("core: score is additive across a shared boundary flip", || {
        let mut rng = substream(13, 0);
        for _ in 0..20_000 {
            let len = rng.random_range(2..=200);
            let s = random_sequence(&mut rng, len);
            let m = rng.random_range(1..=len);
            let left = s.slice(0, m);
            let right = s.slice(m - 1, len);
            ensure(s.score() == left.score() + right.score(), || format!("split at {m} of {s}"))?;
        }
        Ok("20000 random splits".into())
    }));

    out.push(check("core: text format round trip", || {
        let mut rng = substream(14, 0);
        for _ in 0..5000 {
            let len = rng.random_range(1..=500);
            let s = random_sequence(&mut rng, len);
            let back: FlipSequence = s.to_text().parse().map_err(|e| format!("{e}"))?;
            ensure(back == s, || format!("round trip fails at {s}"))?;
        }
        Ok("5000 random sequences".into())
    }));

    // excursions
    out.push(check("excursions: reversal is a bijection from B to A-hat excursions", || {
        let mut sizes = Vec::new();
        for k in 2..=14 {
            let b = enumerate_excursions(k, ExcursionKind::B).map_err(|e| e.to_string())?;
            let a_hat = enumerate_excursions(k, ExcursionKind::AHat).map_err(|e| e.to_string())?;
            let mut image: Vec<FlipSequence> = b.iter().map(|s| s.reverse()).collect();
            image.sort_by_key(|s| s.to_text());
            let mut target = a_hat.clone();
            target.sort_by_key(|s| s.to_text());
            ensure(image == target, || format!("image of B_{k} differs from A-hat_{k}"))?;
            sizes.push(b.len());
        }
        Ok(format!("|B_k| for k = 2..14: {sizes:?}"))
    }));

    out.push(check("excursions: position classes match the sign of the score", || {
        let mut cases = 0u64;
        for s in all_sequences(16) {
            let n = s.len();
            let class = decompose(&s).classify(n).map_err(|e| e.to_string())?;
            let want = sign_class(pair_scan_score(&s));
            let got = if class == PositionClass::InitialTailrun { PositionClass::NeutralZero } else { class };
            ensure(got == want, || format!("{s}: classified {class:?}, score says {want:?}"))?;
            cases += 1;
        }
        Ok(format!("{cases} cases"))
    }));

    out.push(check("excursions: tie probability equals the mass of the zero classes", || {
        for n in 1..=16usize {
            let mut ties = 0u64;
            let mut zero_classes = 0u64;
            for bits in 0..1u64 << n {
                let s = FlipSequence::from_bits(bits, n);
                ties += (packed_score(bits, n as u32) == 0) as u64;
                let c = decompose(&s).classify(n).map_err(|e| e.to_string())?;
                zero_classes += matches!(c, PositionClass::InitialTailrun | PositionClass::NeutralZero) as u64;
            }
            ensure(ties == zero_classes, || format!("n={n}: {ties} ties vs {zero_classes}"))?;
        }
        Ok("n = 1..16".into())
    }));

    out.push(check("excursions: decomposition re-serializes to its input", || {
        for s in all_sequences(16) {
            ensure(decompose(&s).to_sequence() == s, || format!("round trip fails at {s}"))?;
        }
        let samples = if full { 100_000 } else { 5_000 };
        let bad = (0..samples as u64)
            .into_par_iter()
            .find_any(|&i| {
                let mut rng = substream(15, i);
                let s = random_sequence(&mut rng, 1000);
                decompose(&s).to_sequence() != s
            });
        ensure(bad.is_none(), || format!("random sample {bad:?} fails"))?;
        Ok(format!("exhaustive to 16 + {samples} random of length 1000"))
    }));

    out.push(check("excursions: slot windows have the required interior score signs", || {
        let mut rng = substream(16, 0);
        let mut slots = 0usize;
        for _ in 0..2000 {
            let s = random_sequence(&mut rng, 400);
            for slot in decompose(&s).slots {
                let scores = slot.window.score_series();
                let v = scores.values();
                match slot.kind {
                    SlotKind::B => {
                        let interior_end = if slot.complete { v.len() - 1 } else { v.len() };
                        ensure(v[1..interior_end].iter().all(|&x| x > 0), || format!("B slot {slot:?}"))?;
                        if slot.complete {
                            ensure(classify_excursion(&slot.window) == ExcursionKind::B, || format!("{slot:?}"))?;
                        }
                    }
                    SlotKind::A => {
                        let tau_len = slot.tau_end.map_or(v.len(), |t| t - slot.start);
                        ensure(v[1..tau_len].iter().all(|&x| x < 0), || format!("A slot {slot:?}"))?;
                        if slot.complete {
                            ensure(classify_excursion(&slot.window) == ExcursionKind::AHat, || format!("{slot:?}"))?;
                        }
                    }
                }
                slots += 1;
            }
        }
        Ok(format!("{slots} slots"))
    }));

    out.push(check("excursions: coupled Monte Carlo difference matches the exact value", || {
        let trials = if full { 1_000_000 } else { 100_000 };
        let mut details = Vec::new();
        for (n, exact) in [(3usize, 0.125), (4, 0.125), (5, 3.0 / 32.0)] {
            let e = coupled_diff_mc(n, trials, 2024).map_err(|e| e.to_string())?;
            let z = (e.estimate - exact) / e.stderr;
            ensure(z.abs() <= 4.0, || format!("n={n}: estimate {} z={z:.2}", e.estimate))?;
            details.push(format!("n={n} z={z:.2}"));
        }
        Ok(details.join(", "))
    }));

    // exact
    out.push(check("exact: dynamic programme equals enumeration", || {
        let n_max = if full { 20 } else { 14 };
        for (pn, pd) in [(1i64, 2i64), (1, 3), (2, 3)] {
            let p = BigRational::new(pn.into(), pd.into());
            let sweep = dp_exact_sweep(n_max, &p).map_err(|e| e.to_string())?;
            for n in 1..=n_max {
                let e = enumerate_distribution(n, &p).map_err(|e| e.to_string())?;
                ensure(sweep[n - 1] == e, || format!("n={n} p={pn}/{pd}"))?;
            }
        }
        Ok(format!("n <= {n_max}, p in {{1/2, 1/3, 2/3}}"))
    }));

    out.push(check("exact: B strictly ahead of A from three flips on", || {
        let n_max = if full { 2000 } else { 300 };
        let sweep = dp_exact_sweep(n_max, &half()).map_err(|e| e.to_string())?;
        ensure(sweep[0].p_a == sweep[0].p_b && sweep[1].p_a == sweep[1].p_b, || "n = 1, 2 not level".into())?;
        ensure(sweep[2].diff() == BigRational::new(1.into(), 8.into()), || "n = 3 difference is not 1/8".into())?;
        for d in &sweep[2..] {
            ensure(d.p_b > d.p_a, || format!("n={}: pB <= pA", d.n))?;
            ensure((&d.p_a + &d.p_b + &d.p_tie).is_one(), || format!("n={}: mass != 1", d.n))?;
        }
        Ok(format!("3 <= n <= {n_max}"))
    }));

    out.push(check("exact: float and exact modes agree within the rounding bound", || {
        let n_max = if full { 2000 } else { 300 };
        let exact = dp_exact_sweep(n_max, &half()).map_err(|e| e.to_string())?;
        let float = dp_float_sweep(n_max, 0.5).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for (e, f) in exact.iter().zip(&float) {
            let [a, b, t] = e.to_float();
            let dev = (a - f.p_a).abs().max((b - f.p_b).abs()).max((t - f.p_tie).abs());
            ensure(dev <= f.rounding_bound, || format!("n={}: deviation {dev:e} > {:e}", e.n, f.rounding_bound))?;
            worst = worst.max(dev / f.rounding_bound);
        }
        Ok(format!("n <= {n_max}, worst deviation {worst:.3} of bound"))
    }));

    out.push(check("exact: biased coin p = 0.6 drives A's win probability up", || {
        let vals: Vec<f64> = [50, 100, 200, 500]
            .iter()
            .map(|&n| dp_float(n, 0.6).map(|d| d.p_a))
            .collect::<crate::Result<_>>()
            .map_err(|e| e.to_string())?;
        ensure(vals.windows(2).all(|w| w[0] < w[1]) && vals[3] > 0.95, || format!("{vals:?}"))?;
        Ok(format!("pA = {vals:?}"))
    }));

    // renewal
    out.push(check("renewal: convolution of pi equals the exact difference", || {
        let sweep = dp_exact_sweep(200, &half()).map_err(|e| e.to_string())?;
        for n in 3..=200u64 {
            let r = renewal_diff(n).map_err(|e| e.to_string())?;
            ensure(r == sweep[n as usize - 1].diff(), || format!("n={n}"))?;
        }
        Ok("3 <= n <= 200, rational equality".into())
    }));

    out.push(check("renewal: closed-form count equals brute force", || {
        let m_max = if full { 24 } else { 20 };
        for m in 1..=m_max {
            let brute = brute_count_rx(m);
            ensure(count_rx(m as u64) == BigUint::from(brute), || format!("m={m}: brute {brute}"))?;
        }
        Ok(format!("m <= {m_max}"))
    }));

    out.push(check("renewal: pi_m sqrt(m) approaches 1/(2 sqrt(pi))", || {
        let devs: Vec<f64> = [100u64, 1000, 10_000, 100_000]
            .iter()
            .map(|&m| (pi_float(m) * (m as f64).sqrt() / C - 1.0).abs())
            .collect();
        ensure(devs.windows(2).all(|w| w[1] < w[0]) && devs[3] < 0.05, || format!("{devs:?}"))?;
        Ok(format!("deviations {}", devs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")))
    }));

    out.push(check("renewal: win difference and tie probability follow the sqrt(n) laws", || {
        let n = 10_000usize;
        let d = dp_float(n, 0.5).map_err(|e| e.to_string())?;
        let rn = (n as f64).sqrt();
        let (rd, rt) = (d.diff() * rn / C, d.p_tie * rn / (2.0 * C));
        ensure((0.9..=1.1).contains(&rd) && (0.9..=1.1).contains(&rt), || format!("{rd} {rt}"))?;
        Ok(format!("n = {n}: diff ratio {rd:.6}, tie ratio {rt:.6}"))
    }));

    out.push(check("renewal: asymptotic report identities", || {
        for n in [1u64, 2, 100, 12_345] {
            let a = asymptotics(n).map_err(|e| e.to_string())?;
            ensure(
                a.tie_approx == 2.0 * a.diff_approx
                    && a.deficit_a == 3.0 * a.deficit_b
                    && a.deficit_a + a.deficit_b == a.tie_approx,
                || format!("n={n}: {a:?}"),
            )?;
        }
        Ok("n in {1, 2, 100, 12345}".into())
    }));

    out.push(check("renewal: float pi agrees with exact pi to 12 digits", || {
        for m in 3..=200u64 {
            let e = to_f64(&pi_exact(m));
            ensure(((pi_float(m) - e) / e).abs() < 1e-12, || format!("m={m}"))?;
        }
        Ok("3 <= m <= 200".into())
    }));

    out.push(check("renewal: tail-indexed walk has mean-zero jumps and returns to zero", || {
        let mean = jump_moment_truncated(60, 1);
        ensure(
            mean.abs() <= BigRational::new(1.into(), BigUint::from(1u64 << 50).into()),
            || format!("truncated mean {}", to_f64(&mean)),
        )?;
        let std = to_f64(&jump_moment_truncated(200, 2)).sqrt();
        let steps = 1_000_000u64;
        let seeds = if full { 20 } else { 5 };
        let mut min_hits = u64::MAX;
        for seed in 0..seeds {
            let w = tailwalk(steps, seed).map_err(|e| e.to_string())?;
            ensure(w.zero_hits >= 1, || format!("seed {seed}: no return to zero"))?;
            ensure(
                w.sample_mean_jump.abs() <= 5.0 * std / (steps as f64).sqrt(),
                || format!("seed {seed}: mean jump {}", w.sample_mean_jump),
            )?;
            min_hits = min_hits.min(w.zero_hits);
        }
        Ok(format!("{seeds} seeds, fewest returns {min_hits}"))
    }));

    // montecarlo
    out.push(check("montecarlo: estimates fall within 4 standard errors of exact values", || {
        let trials = if full { 1_000_000 } else { 100_000 };
        let sweep = dp_exact_sweep(100, &half()).map_err(|e| e.to_string())?;
        let mut details = Vec::new();
        for n in [3usize, 4, 50, 100] {
            let r = simulate_game(&SimConfig::new(n, trials, 7)).map_err(|e| e.to_string())?;
            let [a, b, t] = sweep[n - 1].to_float();
            let za = (r.p_a - a) / r.stderr_a;
            let zb = (r.p_b - b) / r.stderr_b;
            let zt = (r.p_tie - t) / r.stderr_tie;
            let zd = (r.diff() - (b - a)) / r.diff_stderr();
            ensure([za, zb, zt, zd].iter().all(|z| z.abs() <= 4.0), || format!("n={n}: z = {za:.2} {zb:.2} {zt:.2} {zd:.2}"))?;
            details.push(format!("n={n} zdiff={zd:.2}"));
        }
        let one = simulate_game(&SimConfig::new(1, 1000, 3)).map_err(|e| e.to_string())?;
        ensure(one.ties == 1000, || "n = 1 produced a winner".into())?;
        Ok(details.join(", "))
    }));

    out.push(check("montecarlo: results are reproducible from the seed", || {
        let cfg = SimConfig::new(100, 200_000, 99);
        let a = simulate_game(&cfg).map_err(|e| e.to_string())?;
        let b = simulate_game(&cfg).map_err(|e| e.to_string())?;
        ensure(a == b, || "two runs differ".into())?;
        let w1 = tailwalk(100_000, 4).map_err(|e| e.to_string())?;
        let w2 = tailwalk(100_000, 4).map_err(|e| e.to_string())?;
        ensure(w1 == w2, || "walks differ".into())?;
        Ok("simulate_game and tailwalk".into())
    }));

    out.push(check("montecarlo: 2-stderr intervals cover the exact value for most seeds", || {
        let trials = if full { 10_000 } else { 2_000 };
        let exact_b = dp_exact_sweep(50, &half()).map_err(|e| e.to_string())?[49].to_float()[1];
        let covered = (0..200u64)
            .into_par_iter()
            .filter(|&seed| {
                let r = simulate_game(&SimConfig::new(50, trials, 1000 + seed)).expect("valid config");
                (r.p_b - exact_b).abs() <= 2.0 * r.stderr_b
            })
            .count();
        ensure(covered >= 180, || format!("{covered}/200 covered"))?;
        Ok(format!("{covered}/200 seeds covered"))
    }));

    out.push(check("exact: enumeration matches the hand-checked small cases", || {
        let d3 = enumerate_distribution(3, &half()).map_err(|e| e.to_string())?;
        ensure(d3.diff() == BigRational::new(1.into(), 8.into()), || "n = 3".into())?;
        let d4 = enumerate_distribution(4, &half()).map_err(|e| e.to_string())?;
        let sixteenth = |k: i64| BigRational::new(k.into(), 16.into());
        ensure(
            d4.p_b == sixteenth(6) && d4.p_a == sixteenth(4) && d4.p_tie == sixteenth(6),
            || "n = 4".into(),
        )?;
        ensure(d4.p_a.numer().is_positive() && !d4.p_tie.is_zero(), || "n = 4 degenerate".into())?;
        Ok("n = 3, 4".into())
    }));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_count_small() {
        assert_eq!(brute_count_rx(3), 1);
        assert_eq!(brute_count_rx(5), 1);
        assert_eq!(brute_count_rx(6), 4);
        assert_eq!(brute_count_rx(2), 0);
    }

    #[test]
    fn pair_scan_examples() {
        assert_eq!(pair_scan_score(&"HHT".parse().unwrap()), 0);
        assert_eq!(pair_scan_score(&"HTHT".parse().unwrap()), 2);
    }
}
