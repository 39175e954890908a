//! Eve's information on the key under the incoherent attack, the
//! Csiszár–Körner yield `I_AB − I_AE`, and the noise thresholds where it
//! vanishes.
//!
//! In round `n` a key bit is built from `2^n` transmitted pairs on which
//! Alice holds the same letter. Eve holds one letter per pair, drawn
//! independently from `q(e|a)` with `q_s = η/4` for `e = a` and
//! `q_d = (4 − η)/12` otherwise. Her information is the mutual information
//! between Alice's bit and the whole sequence of her letters, which only
//! depends on how often each letter occurs.

use crate::channel::{xlog2x, JointTable, NoiseParameter, SEPARABLE_NOISE};
use crate::error::{Error, Result};
use crate::eve::{alice_eve_table, eta, eta_from_table, eve_povm4, PurificationParams};
use crate::keygen::{i_ab_total, iteration_probabilities, DEFAULT_MAX_ITER};
use crate::qmath::letter_labels;
use crate::roots::bisect;

/// Largest round for which [`i_ae_n`] enumerates letter counts exactly.
pub const MAX_EXACT_ITER: u32 = 6;

/// Default bisection tolerance for [`threshold`].
pub const THRESHOLD_TOL: f64 = 1e-6;

/// Letter counts `(n_A, n_B, n_C, n_D)` of one of Eve's sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountVector(pub [u32; 4]);

impl CountVector {
    /// Checks that the counts describe a sequence of length `2^n`.
    pub fn new(counts: [u32; 4], n: u32) -> Result<Self> {
        let expected = sequence_length(n)?;
        if counts.iter().map(|&c| c as u64).sum::<u64>() != expected as u64 {
            return Err(Error::BadCounts { counts, expected });
        }
        Ok(Self(counts))
    }

    pub fn counts(&self) -> [u32; 4] {
        self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

fn sequence_length(n: u32) -> Result<u32> {
    if n == 0 {
        return Err(Error::ZeroIteration);
    }
    if n > MAX_EXACT_ITER {
        return Err(Error::IterationTooLarge {
            n,
            max: MAX_EXACT_ITER,
        });
    }
    Ok(1 << n)
}

/// All count vectors with the given total, in lexicographic order.
pub fn compositions(total: u32) -> Vec<CountVector> {
    let mut out = Vec::new();
    for a in 0..=total {
        for b in 0..=total - a {
            for c in 0..=total - a - b {
                out.push(CountVector([a, b, c, total - a - b - c]));
            }
        }
    }
    out
}

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Exact at every step: acc holds C(n, i) before the update.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of sequences with the given letter counts.
pub fn multinomial(counts: &CountVector) -> u128 {
    let [a, b, c, _] = counts.0;
    let n = counts.total();
    binomial(n, a)
        .checked_mul(binomial(n - a, b))
        .and_then(|x| x.checked_mul(binomial(n - a - b, c)))
        .expect("multinomial coefficient fits in u128 for sequences of length <= 64")
}

/// Bob's announced partition as letter indices: `zero` carries key bit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LetterGrouping {
    pub zero: [usize; 2],
    pub one: [usize; 2],
}

impl LetterGrouping {
    /// The three ways of splitting {A,B,C,D} into two pairs.
    pub const ALL: [LetterGrouping; 3] = [
        LetterGrouping {
            zero: [0, 1],
            one: [2, 3],
        },
        LetterGrouping {
            zero: [0, 2],
            one: [1, 3],
        },
        LetterGrouping {
            zero: [0, 3],
            one: [1, 2],
        },
    ];
}

impl Default for LetterGrouping {
    fn default() -> Self {
        Self::ALL[0]
    }
}

/// Probability that Alice's letter is the one counted `n_a` times and Eve
/// sees one particular sequence containing it `n_a` times.
fn letter_weight(n_a: u32, len: u32, eta: f64) -> f64 {
    let q_s = eta / 4.0;
    let q_d = (4.0 - eta) / 12.0;
    0.25 * q_s.powi(n_a as i32) * q_d.powi((len - n_a) as i32)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0 + 1e-12).contains(&eta) {
        return Err(Error::ParameterOutOfRange {
            name: "eta",
            value: eta,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// `(q_n^0, q_n^1, q_n)` for one sequence with the given counts: the joint
/// probability of Alice's key bit and that sequence, and its marginal.
pub fn eve_sequence_probs(n: u32, counts: &CountVector, eta: f64) -> Result<(f64, f64, f64)> {
    eve_sequence_probs_grouped(n, counts, eta, LetterGrouping::default())
}

pub fn eve_sequence_probs_grouped(
    n: u32,
    counts: &CountVector,
    eta: f64,
    grouping: LetterGrouping,
) -> Result<(f64, f64, f64)> {
    let len = sequence_length(n)?;
    if counts.total() != len {
        return Err(Error::BadCounts {
            counts: counts.0,
            expected: len,
        });
    }
    check_eta(eta)?;
    let w = |k: usize| letter_weight(counts.0[k], len, eta);
    let q0 = w(grouping.zero[0]) + w(grouping.zero[1]);
    let q1 = w(grouping.one[0]) + w(grouping.one[1]);
    Ok((q0, q1, q0 + q1))
}

fn bit_term(q_bit: f64, q: f64) -> f64 {
    if q_bit > 0.0 {
        q_bit * (2.0 * q_bit / q).log2()
    } else {
        0.0
    }
}

/// Mutual information between one key bit and Eve's sequence at round `n`.
pub fn keybit_info_from_eta(eta: f64, n: u32, grouping: LetterGrouping) -> Result<f64> {
    let len = sequence_length(n)?;
    check_eta(eta)?;
    let mut info = 0.0;
    for counts in compositions(len) {
        let (q0, q1, q) = eve_sequence_probs_grouped(n, &counts, eta, grouping)?;
        if q > 0.0 {
            info += multinomial(&counts) as f64 * (bit_term(q0, q) + bit_term(q1, q));
        }
    }
    Ok(info.max(0.0))
}

/// Round-one key-bit information written out by sequence type: Eve's two
/// letters equal, distinct but on the same side of Bob's partition, or on
/// opposite sides (which reveals nothing).
pub fn keybit_info_1_from_eta(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let q_s = eta / 4.0;
    let q_d = (4.0 - eta) / 12.0;
    let pair = |x: f64, y: f64| {
        let q = x + y;
        if q > 0.0 {
            bit_term(x, q) + bit_term(y, q)
        } else {
            0.0
        }
    };
    // Both letters equal to one in the favoured group: Alice holds that
    // letter or its partner.
    let equal = pair(0.25 * (q_s * q_s + q_d * q_d), 0.5 * q_d * q_d);
    // Both letters of the favoured group.
    let same_side = pair(0.5 * q_s * q_d, 0.5 * q_d * q_d);
    // One letter on each side.
    let split_half = 0.25 * (q_s * q_d + q_d * q_d);
    let split = pair(split_half, split_half);
    Ok((4.0 * equal + 4.0 * same_side + 8.0 * split).max(0.0))
}

/// Joint table of Alice's round-one key bit and Eve's ordered letter pair,
/// for the partition {A,B} → 0, {C,D} → 1.
pub fn keybit_table_1(eta: f64) -> Result<JointTable> {
    check_eta(eta)?;
    let g = LetterGrouping::default();
    let mut probs = vec![0.0; 2 * 16];
    for e1 in 0..4 {
        for e2 in 0..4 {
            let mut counts = [0u32; 4];
            counts[e1] += 1;
            counts[e2] += 1;
            let (q0, q1, _) = eve_sequence_probs_grouped(1, &CountVector(counts), eta, g)?;
            probs[e1 * 4 + e2] = q0;
            probs[16 + e1 * 4 + e2] = q1;
        }
    }
    let eve_labels = letter_labels(4)
        .iter()
        .flat_map(|a| letter_labels(4).into_iter().map(move |b| format!("{a}{b}")))
        .collect();
    JointTable::new(
        vec!["alice_bit".into(), "eve_pair".into()],
        vec![vec!["0".into(), "1".into()], eve_labels],
        probs,
    )
}

fn key_rate(eps: NoiseParameter, n: u32) -> Result<f64> {
    Ok(iteration_probabilities(eps, n)?.p_succ_n / 2f64.powi(n as i32))
}

/// Eve's round-one information per transmitted pair, from the closed form.
pub fn i_ae_1(eps: NoiseParameter) -> Result<f64> {
    Ok(key_rate(eps, 1)? * keybit_info_1_from_eta(eta(eps)?)?)
}

/// Eve's round-`n` information per transmitted pair, by exact summation
/// over the letter counts of her `2^n`-letter sequence.
pub fn i_ae_n(eps: NoiseParameter, n: u32) -> Result<f64> {
    i_ae_n_grouped(eps, n, LetterGrouping::default())
}

pub fn i_ae_n_grouped(eps: NoiseParameter, n: u32, grouping: LetterGrouping) -> Result<f64> {
    sequence_length(n)?;
    Ok(key_rate(eps, n)? * keybit_info_from_eta(eta(eps)?, n, grouping)?)
}

/// As [`i_ae_n`], with η read off the Born-rule Alice–Eve table of the
/// purification at gauge phase `φ` instead of the closed form.
pub fn i_ae_n_born(params: &PurificationParams, n: u32) -> Result<f64> {
    sequence_length(n)?;
    let table = alice_eve_table(params, &eve_povm4(params.phi()))?;
    let eta = eta_from_table(&table)?.clamp(0.0, 1.0);
    Ok(key_rate(params.eps(), n)? * keybit_info_from_eta(eta, n, LetterGrouping::default())?)
}

pub fn i_ae_total(eps: NoiseParameter, n_max: u32) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::ZeroIteration);
    }
    (1..=n_max).map(|n| i_ae_n(eps, n)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationYield {
    pub n: u32,
    pub i_ab: f64,
    pub i_ae: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YieldReport {
    pub eps: f64,
    pub n_max: u32,
    pub i_ab_total: f64,
    pub i_ae_total: f64,
    /// `i_ab_total − i_ae_total`.
    pub yield_ck: f64,
    pub per_iteration: Vec<IterationYield>,
}

impl YieldReport {
    pub fn csv_header(n_max: u32) -> Vec<String> {
        let mut h: Vec<String> = ["eps", "i_ab_total", "i_ae_total", "yield"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for n in 1..=n_max {
            h.push(format!("i_ab_{n}"));
            h.push(format!("i_ae_{n}"));
        }
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let f = crate::keygen::fmt_f;
        let mut row = vec![
            f(self.eps),
            f(self.i_ab_total),
            f(self.i_ae_total),
            f(self.yield_ck),
        ];
        for it in &self.per_iteration {
            row.push(f(it.i_ab));
            row.push(f(it.i_ae));
        }
        row
    }
}

fn check_physical(eps: NoiseParameter) -> Result<()> {
    if eps.value() > SEPARABLE_NOISE + 1e-12 {
        return Err(Error::NoiseOutOfDomain {
            eps: eps.value(),
            lo: 0.0,
            hi: SEPARABLE_NOISE,
        });
    }
    Ok(())
}

pub fn ck_yield(eps: NoiseParameter, n_max: u32) -> Result<YieldReport> {
    check_physical(eps)?;
    let ab = i_ab_total(eps, n_max)?;
    let per_iteration: Vec<IterationYield> = ab
        .terms
        .iter()
        .map(|t| {
            Ok(IterationYield {
                n: t.n,
                i_ab: t.i_ab_n,
                i_ae: i_ae_n(eps, t.n)?,
            })
        })
        .collect::<Result<_>>()?;
    let i_ab_total: f64 = per_iteration.iter().map(|t| t.i_ab).sum();
    let i_ae_total: f64 = per_iteration.iter().map(|t| t.i_ae).sum();
    Ok(YieldReport {
        eps: eps.value(),
        n_max,
        i_ab_total,
        i_ae_total,
        yield_ck: i_ab_total - i_ae_total,
        per_iteration,
    })
}

/// Noise level where the yield with `n_max` rounds crosses zero.
pub fn threshold(n_max: u32, tol: f64) -> Result<f64> {
    bisect(
        |e| Ok(ck_yield(NoiseParameter::new(e)?, n_max)?.yield_ck),
        0.0,
        SEPARABLE_NOISE,
        tol,
    )
}

/// Threshold with the default number of rounds and tolerance.
pub fn default_threshold() -> Result<f64> {
    threshold(DEFAULT_MAX_ITER, THRESHOLD_TOL)
}

/// Alice–Bob information of the six-state protocol,
/// `(ε log₂ε + (2−ε) log₂(2−ε))/6`.
pub fn six_state_iab(eps: NoiseParameter) -> f64 {
    let e = eps.value();
    (xlog2x(e) + xlog2x(2.0 - e)) / 6.0
}
