//! Excursions of the score process and the renewal decomposition of a flip
//! stream.
//!
//! A B-excursion starts `HT`, ends `HH`, has strictly positive score on its
//! interior and returns to zero at its last flip. An A-excursion is the
//! mirror image (starts `HH`, ends `HT`, strictly negative interior). An
//! A-hat excursion is an A-excursion followed by a possibly empty run of
//! tails and a single head. Reversal maps B-excursions of length `k` one to
//! one onto A-hat excursions of length `k`.
//!
//! A stream decomposes as an initial run of tails ending at the first head
//! (position `M`), followed by slots. Every slot window starts at a renewal
//! head, which it shares with the end of the previous window:
//!
//! ```text
//! B slot:  H T ...... H H          ends at the first return of the score to 0
//! A slot:  H H ...... H T T..T H   tau ends at the first return to 0, then a
//!                                  tailrun and the next head
//! ```

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::montecarlo::{run_batches, FairBits, DEFAULT_BATCH_SIZE};
use crate::sequence::{Flip, FlipSequence};

pub const ENUMERATION_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExcursionKind {
    B,
    A,
    #[serde(rename = "A-hat")]
    AHat,
    None,
}

/// Scores of `seq` read as a standalone window: entry `l - 1` is `S_l`.
fn window_scores(seq: &FlipSequence) -> Vec<i64> {
    seq.score_series().values().to_vec()
}

fn starts_with(seq: &FlipSequence, a: Flip, b: Flip) -> bool {
    seq.len() >= 2 && seq.get(0) == a && seq.get(1) == b
}

fn ends_with(seq: &FlipSequence, a: Flip, b: Flip) -> bool {
    let k = seq.len();
    k >= 2 && seq.get(k - 2) == a && seq.get(k - 1) == b
}

fn is_b_excursion(seq: &FlipSequence) -> bool {
    if !starts_with(seq, Flip::H, Flip::T) || !ends_with(seq, Flip::H, Flip::H) {
        return false;
    }
    let s = window_scores(seq);
    let k = s.len();
    s[k - 1] == 0 && s[1..k - 1].iter().all(|&v| v > 0)
}

fn is_a_excursion(seq: &FlipSequence) -> bool {
    if !starts_with(seq, Flip::H, Flip::H) || !ends_with(seq, Flip::H, Flip::T) {
        return false;
    }
    let s = window_scores(seq);
    let k = s.len();
    s[k - 1] == 0 && s[1..k - 1].iter().all(|&v| v < 0)
}

/// Splits an A-hat candidate `tau . T^j . H` into `tau` and `j`.
fn split_a_hat(seq: &FlipSequence) -> Option<(FlipSequence, usize)> {
    let k = seq.len();
    if k < 4 || seq.last() != Some(Flip::H) {
        return None;
    }
    // tau ends at the tail right after the last head before the final one
    let prev_head = (0..k - 1).rev().find(|&i| seq.get(i) == Flip::H)?;
    if prev_head + 1 >= k - 1 {
        return None;
    }
    let tau = seq.slice(0, prev_head + 2);
    let tail_len = k - 1 - (prev_head + 2);
    is_a_excursion(&tau).then_some((tau, tail_len))
}

pub fn classify_excursion(seq: &FlipSequence) -> ExcursionKind {
    if is_b_excursion(seq) {
        ExcursionKind::B
    } else if is_a_excursion(seq) {
        ExcursionKind::A
    } else if split_a_hat(seq).is_some() {
        ExcursionKind::AHat
    } else {
        ExcursionKind::None
    }
}

/// All sequences of length `k` of the given kind, in increasing packed
/// order (bit `i` set means flip `i + 1` is H).
pub fn enumerate_excursions(k: usize, kind: ExcursionKind) -> Result<Vec<FlipSequence>> {
    if k < 2 {
        return domain(format!("excursion length must be at least 2, got {k}"));
    }
    if k > ENUMERATION_CAP {
        return Err(Error::Resource {
            what: "excursion enumeration length",
            requested: k,
            limit: ENUMERATION_CAP,
        });
    }
    Ok((0..1u64 << k)
        .map(|bits| FlipSequence::from_bits(bits, k))
        .filter(|s| classify_excursion(s) == kind)
        .collect())
}

/// The length-preserving coupling: `alpha = tau . T^tail_len . H` is an
/// A-hat excursion and `beta`, its reversal, is a B-excursion.
pub fn couple(tau: &FlipSequence, tail_len: usize) -> Result<(FlipSequence, FlipSequence)> {
    if classify_excursion(tau) != ExcursionKind::A {
        return domain(format!("{tau} is not an A-excursion"));
    }
    let mut alpha = tau.clone();
    for _ in 0..tail_len {
        alpha.push(Flip::T);
    }
    alpha.push(Flip::H);
    let beta = alpha.reverse();
    Ok((alpha, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SlotKind {
    B,
    A,
}

/// One renewal period. Positions are 1-based in the host sequence and the
/// window `start..=end` includes the shared head at `start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub start: usize,
    pub end: usize,
    pub kind: SlotKind,
    /// Last flip of tau for A slots whose tau has finished.
    pub tau_end: Option<usize>,
    pub complete: bool,
    #[serde(skip)]
    pub window: FlipSequence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub length: usize,
    /// `M - 1`, or the whole length when there is no head.
    pub initial_tailrun_len: usize,
    /// `M`, the position of the first head.
    pub first_head_pos: Option<usize>,
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PositionClass {
    InitialTailrun,
    BWinning,
    AWinning,
    NeutralZero,
}

impl Decomposition {
    /// The final slot, if it was cut off by the end of the sequence.
    pub fn trailing(&self) -> Option<&Slot> {
        self.slots.last().filter(|s| !s.complete)
    }

    /// Re-serializes `L0` followed by every head-stripped slot window.
    pub fn to_sequence(&self) -> FlipSequence {
        let mut out = FlipSequence::repeat(Flip::T, self.initial_tailrun_len);
        if self.first_head_pos.is_some() {
            out.push(Flip::H);
        }
        for slot in &self.slots {
            out.extend_from(&slot.window.slice(1, slot.window.len()));
        }
        out
    }

    /// Which case of the position classification holds at 1-based `n`.
    pub fn classify(&self, n: usize) -> Result<PositionClass> {
        if n == 0 || n > self.length {
            return domain(format!("position {n} outside 1..={}", self.length));
        }
        match self.first_head_pos {
            None => return Ok(PositionClass::InitialTailrun),
            Some(m) if n <= m => return Ok(PositionClass::InitialTailrun),
            Some(_) => {}
        }
        let idx = self.slots.partition_point(|s| s.end < n);
        let slot = &self.slots[idx];
        debug_assert!(slot.start < n && n <= slot.end);
        Ok(match (slot.kind, slot.tau_end) {
            (SlotKind::B, _) if n < slot.end || !slot.complete => PositionClass::BWinning,
            (SlotKind::A, Some(t)) if n < t => PositionClass::AWinning,
            (SlotKind::A, None) => PositionClass::AWinning,
            _ => PositionClass::NeutralZero,
        })
    }
}

/// Greedy left-to-right parse into `L0` and slots.
pub fn decompose(seq: &FlipSequence) -> Decomposition {
    let len = seq.len();
    let flip = |pos: usize| seq.get(pos - 1);
    let Some(m) = (1..=len).find(|&i| flip(i) == Flip::H) else {
        return Decomposition {
            length: len,
            initial_tailrun_len: len,
            first_head_pos: None,
            slots: Vec::new(),
        };
    };

    let mut slots = Vec::new();
    let mut push = |start: usize, end: usize, kind, tau_end, complete| {
        slots.push(Slot {
            start,
            end,
            kind,
            tau_end,
            complete,
            window: seq.slice(start - 1, end),
        });
    };

    // first position j > from at which the window score, started at -1 or
    // +1 after `from + 1`, returns to zero
    let first_return = |from: usize, initial: i64| -> Option<usize> {
        let mut s = initial;
        for j in from + 2..=len {
            if flip(j - 1) == Flip::H {
                s += if flip(j) == Flip::H { -1 } else { 1 };
            }
            if s == 0 {
                return Some(j);
            }
        }
        None
    };

    let mut head = m;
    loop {
        if head == len {
            break;
        }
        if flip(head + 1) == Flip::T {
            match first_return(head, 1) {
                Some(end) => {
                    push(head, end, SlotKind::B, None, true);
                    head = end;
                }
                None => {
                    push(head, len, SlotKind::B, None, false);
                    break;
                }
            }
        } else {
            let Some(tau_end) = first_return(head, -1) else {
                push(head, len, SlotKind::A, None, false);
                break;
            };
            match (tau_end + 1..=len).find(|&j| flip(j) == Flip::H) {
                Some(next) => {
                    push(head, next, SlotKind::A, Some(tau_end), true);
                    head = next;
                }
                None => {
                    push(head, len, SlotKind::A, Some(tau_end), false);
                    break;
                }
            }
        }
    }

    Decomposition {
        length: len,
        initial_tailrun_len: m - 1,
        first_head_pos: Some(m),
        slots,
    }
}

pub fn classify_position(seq: &FlipSequence, n: usize) -> Result<PositionClass> {
    decompose(seq).classify(n)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupledEstimate {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Whether `n` falls in `beta_I° \ tau_I°` for one sample of the renewal
/// construction. Slot lengths are the same for the alpha and beta branches,
/// so the slot-type coin does not enter the indicator.
fn coupled_indicator<R: Rng>(bits: &mut FairBits<R>, n: usize) -> bool {
    let m = 1 + bits.tails_before_head() as usize;
    if n <= m {
        return false;
    }
    let mut head = m;
    loop {
        // tau starts HH
        let mut s = -1i64;
        let mut prev_head = true;
        let mut j = head + 1;
        let tau_end = loop {
            if j >= n {
                // n is strictly inside tau
                return false;
            }
            j += 1;
            let h = bits.flip();
            if prev_head {
                s += if h { -1 } else { 1 };
            }
            prev_head = h;
            if s == 0 {
                break j;
            }
        };
        if n == tau_end {
            return true;
        }
        let end = tau_end + 1 + bits.tails_before_head() as usize;
        if n < end {
            return true;
        }
        if n == end {
            return false;
        }
        head = end;
    }
}

/// Estimates `P(S_n > 0) - P(S_n < 0)` as half the probability that `n`
/// lies in the part of its slot covered by beta but not by tau.
pub fn coupled_diff_mc(n: usize, trials: u64, seed: u64) -> Result<CoupledEstimate> {
    if n < 3 {
        return domain(format!("horizon must be at least 3, got {n}"));
    }
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    let hits = run_batches(trials, DEFAULT_BATCH_SIZE, seed, |rng, count| {
        let mut bits = FairBits::new(rng);
        (0..count).filter(|_| coupled_indicator(&mut bits, n)).count() as u64
    });
    let q = hits as f64 / trials as f64;
    Ok(CoupledEstimate {
        n,
        trials,
        seed,
        hits,
        estimate: 0.5 * q,
        stderr: 0.5 * (q * (1.0 - q) / trials as f64).sqrt(),
    })
}
