//! Two-way iterative key generation.
//!
//! Each round, Alice announces pairs of positions where she holds the same
//! letter. If Bob's two letters differ he publishes the partition of
//! {A,B,C,D} that puts his letters in one group, with random 0/1 labels, and
//! both write down a key bit. If Bob's letters agree, both keep their letter
//! in a new, shorter sequence that feeds the next round.
//!
//! Alongside the executable rounds this module carries the exact recursion
//! for the effective noise of the recycled sequences and the resulting
//! per-iteration mutual information.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::channel::{joint_probs_ab, xlog2x, NoiseParameter};
use crate::error::{Error, Result};
use crate::sampling::TableSampler;

/// Default number of key-generation iterations used for totals.
pub const DEFAULT_MAX_ITER: u32 = 5;

/// Outcome letter of the tetrahedron measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    C,
    D,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::B, Letter::C, Letter::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or(Error::InvalidOutcome { index: i, len: 4 })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// Where an entry of a (possibly recycled) sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    /// Index of the first original transmission folded into this entry.
    pub origin: usize,
    /// Round in which the entry is used; an entry at depth `d` stands for
    /// `2^(d-1)` transmitted pairs.
    pub depth: u32,
}

/// A party's letters together with their provenance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LetterSequence {
    letters: Vec<Letter>,
    provenance: Vec<Provenance>,
}

impl LetterSequence {
    pub fn new(letters: Vec<Letter>, provenance: Vec<Provenance>) -> Result<Self> {
        if letters.len() != provenance.len() {
            return Err(Error::Misaligned(format!(
                "{} letters with {} provenance records",
                letters.len(),
                provenance.len()
            )));
        }
        let mut origins: Vec<usize> = provenance.iter().map(|p| p.origin).collect();
        origins.sort_unstable();
        if origins.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Misaligned("duplicate provenance origin".into()));
        }
        if provenance.iter().any(|p| p.depth == 0) {
            return Err(Error::Misaligned("provenance depth must be >= 1".into()));
        }
        Ok(Self {
            letters,
            provenance,
        })
    }

    /// Freshly measured letters: origin = position, depth 1.
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        let provenance = (0..letters.len())
            .map(|origin| Provenance { origin, depth: 1 })
            .collect();
        Self {
            letters,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    fn push(&mut self, letter: Letter, provenance: Provenance) {
        self.letters.push(letter);
        self.provenance.push(provenance);
    }
}

/// Bob's public partition of {A,B,C,D} into two labelled pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grouping {
    zero: [Letter; 2],
    one: [Letter; 2],
}

impl Grouping {
    pub fn new(zero: [Letter; 2], one: [Letter; 2]) -> Result<Self> {
        let mut all = [zero[0], zero[1], one[0], one[1]];
        all.sort();
        if all != Letter::ALL {
            return Err(Error::Misaligned(format!(
                "{zero:?} / {one:?} is not a partition of ABCD"
            )));
        }
        Ok(Self { zero, one })
    }

    /// The partition forced by Bob's two distinct letters, with his own
    /// group carrying `bob_group_label`.
    pub fn from_bob_letters(b1: Letter, b2: Letter, bob_group_label: u8) -> Result<Self> {
        if b1 == b2 {
            return Err(Error::Misaligned("Bob's letters must differ".into()));
        }
        let rest: Vec<Letter> = Letter::ALL
            .iter()
            .copied()
            .filter(|&l| l != b1 && l != b2)
            .collect();
        let mine = [b1.min(b2), b1.max(b2)];
        let other = [rest[0], rest[1]];
        match bob_group_label {
            0 => Self::new(mine, other),
            1 => Self::new(other, mine),
            _ => Err(Error::Misaligned("group label must be 0 or 1".into())),
        }
    }

    pub fn zero(&self) -> [Letter; 2] {
        self.zero
    }

    pub fn one(&self) -> [Letter; 2] {
        self.one
    }

    /// Label of the group containing `letter`.
    pub fn label_of(&self, letter: Letter) -> u8 {
        if self.zero.contains(&letter) {
            0
        } else {
            1
        }
    }

    /// Alice's key bit: the label of the group holding her letter.
    pub fn alice_bit(&self, alice: Letter) -> u8 {
        self.label_of(alice)
    }

    /// Bob's key bit: the label of the group not holding his letters.
    pub fn bob_bit(&self, b1: Letter) -> u8 {
        1 - self.label_of(b1)
    }
}

/// Bob's public reply to one announced pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Distinct(Grouping),
    Same,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairAnnouncement {
    /// Positions in the round's input sequences.
    pub positions: (usize, usize),
    pub verdict: Verdict,
}

/// Everything said publicly during one round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnouncementTranscript {
    pub announcements: Vec<PairAnnouncement>,
    /// Positions left unpaired and dropped.
    pub discarded: Vec<usize>,
}

/// Position bookkeeping for one round: `input = keyed + recycled + discarded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundAccounting {
    pub input: usize,
    pub keyed: usize,
    pub recycled: usize,
    pub discarded: usize,
}

impl RoundAccounting {
    pub fn balanced(&self) -> bool {
        self.keyed + self.recycled + self.discarded == self.input
    }
}

#[derive(Debug, Clone)]
pub struct SiftOutcome {
    pub alice_bits: Vec<u8>,
    pub bob_bits: Vec<u8>,
    pub alice_leftover: LetterSequence,
    pub bob_leftover: LetterSequence,
    pub transcript: AnnouncementTranscript,
    pub accounting: RoundAccounting,
}

/// One key-generation round.
///
/// Positions are shuffled and equal-letter positions of Alice are paired
/// greedily in shuffled order, leaving at most one unpaired position per
/// letter; those are discarded. Key bits appear in the order of the
/// `Distinct` announcements in the transcript.
pub fn sift_round<R: Rng + ?Sized>(
    alice: &LetterSequence,
    bob: &LetterSequence,
    rng: &mut R,
) -> Result<SiftOutcome> {
    if alice.len() != bob.len() {
        return Err(Error::Misaligned(format!(
            "Alice has {} letters, Bob {}",
            alice.len(),
            bob.len()
        )));
    }
    if alice.provenance != bob.provenance {
        return Err(Error::Misaligned("provenance records differ".into()));
    }

    let mut order: Vec<usize> = (0..alice.len()).collect();
    order.shuffle(rng);

    let mut pending: [Option<usize>; 4] = [None; 4];
    let mut pairs = Vec::with_capacity(alice.len() / 2);
    for pos in order {
        let slot = &mut pending[alice.letters[pos].index()];
        match slot.take() {
            Some(first) => pairs.push((first, pos)),
            None => *slot = Some(pos),
        }
    }
    let discarded: Vec<usize> = pending.iter().flatten().copied().collect();

    let mut out = SiftOutcome {
        alice_bits: Vec::new(),
        bob_bits: Vec::new(),
        alice_leftover: LetterSequence::default(),
        bob_leftover: LetterSequence::default(),
        transcript: AnnouncementTranscript {
            announcements: Vec::with_capacity(pairs.len()),
            discarded,
        },
        accounting: RoundAccounting {
            input: alice.len(),
            ..Default::default()
        },
    };

    for (i, j) in pairs {
        let a = alice.letters[i];
        let (b1, b2) = (bob.letters[i], bob.letters[j]);
        let verdict = if b1 == b2 {
            let prov = alice.provenance[i];
            let carried = Provenance {
                origin: prov.origin.min(alice.provenance[j].origin),
                depth: prov.depth + 1,
            };
            out.alice_leftover.push(a, carried);
            out.bob_leftover.push(b1, carried);
            out.accounting.recycled += 2;
            Verdict::Same
        } else {
            let label = u8::from(rng.random::<bool>());
            let grouping = Grouping::from_bob_letters(b1, b2, label)?;
            out.alice_bits.push(grouping.alice_bit(a));
            out.bob_bits.push(grouping.bob_bit(b1));
            out.accounting.keyed += 2;
            Verdict::Distinct(grouping)
        };
        out.transcript.announcements.push(PairAnnouncement {
            positions: (i, j),
            verdict,
        });
    }
    out.accounting.discarded = out.transcript.discarded.len();
    if !out.accounting.balanced() {
        return Err(Error::Invariant(format!(
            "round accounting does not balance: {:?}",
            out.accounting
        )));
    }
    Ok(out)
}

/// Effective noise of the recycled sequence:
/// `3ε′/(4−ε′) = (3ε/(4−ε))²`.
pub fn noise_recursion(eps: NoiseParameter) -> NoiseParameter {
    let e = eps.value();
    let x = 3.0 * e / (4.0 - e);
    let next = 4.0 * x * x / (3.0 + x * x);
    NoiseParameter::new(next.clamp(0.0, 1.0)).expect("recursion maps [0,1] into itself")
}

/// Analytic per-iteration quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub n: u32,
    /// Effective noise `ε^(n)`.
    pub eps_n: f64,
    /// Success probability of one announced pair in round `n`.
    pub q_n: f64,
    /// `q^(n) Π_{m<n}(1 − q^(m))`.
    pub p_succ_n: f64,
    pub p_err_n: f64,
    /// Bits per transmitted qubit pair contributed by round `n`.
    pub i_ab_n: f64,
}

fn success_probability(e: f64) -> f64 {
    (4.0 - e) * (2.0 + e) / 12.0
}

/// `[1 + ((4−ε)/(3ε))^(2^(n−1))]^(−1)`, the closed form of `p_err^(n)`.
pub fn p_err_closed_form(eps: NoiseParameter, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroIteration);
    }
    let e = eps.value();
    if e == 0.0 {
        return Ok(0.0);
    }
    let ratio = (4.0 - e) / (3.0 * e);
    let power = ratio.powf(2f64.powi(n as i32 - 1));
    Ok(1.0 / (1.0 + power))
}

pub fn iteration_probabilities(eps: NoiseParameter, n: u32) -> Result<IterationStats> {
    if n == 0 {
        return Err(Error::ZeroIteration);
    }
    let mut e = eps;
    let mut survive = 1.0;
    for _ in 1..n {
        survive *= 1.0 - success_probability(e.value());
        e = noise_recursion(e);
    }
    let eps_n = e.value();
    let q_n = success_probability(eps_n);
    let p_succ_n = q_n * survive;
    let p_err_n = 3.0 * eps_n / (4.0 + 2.0 * eps_n);
    Ok(IterationStats {
        n,
        eps_n,
        q_n,
        p_succ_n,
        p_err_n,
        i_ab_n: p_succ_n / 2f64.powi(n as i32) * i_key(p_err_n),
    })
}

/// Mutual information of a binary symmetric channel with flip rate `p`.
pub fn i_key(p_err: f64) -> f64 {
    1.0 + xlog2x(p_err) + xlog2x(1.0 - p_err)
}

pub fn i_ab_n(eps: NoiseParameter, n: u32) -> Result<f64> {
    Ok(iteration_probabilities(eps, n)?.i_ab_n)
}

/// Partial sum of the per-iteration information with a bound on the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalInfo {
    pub value: f64,
    /// Upper bound on `Σ_{n > n_max} i_ab_n`.
    pub tail_bound: f64,
    pub terms: Vec<IterationStats>,
}

/// `Σ_{n ≤ n_max} i_ab_n`.
///
/// Since `q^(m) ≥ 2/3` for every `ε`, each further term is at most
/// `2^(−n) Π(1 − q^(m))` with a survival factor shrinking by at least 1/3
/// per round, which gives the geometric tail bound.
pub fn i_ab_total(eps: NoiseParameter, n_max: u32) -> Result<TotalInfo> {
    if n_max == 0 {
        return Err(Error::ZeroIteration);
    }
    let terms: Vec<IterationStats> = (1..=n_max)
        .map(|n| iteration_probabilities(eps, n))
        .collect::<Result<_>>()?;
    let last = terms.last().expect("n_max >= 1");
    let survive = last.p_succ_n / last.q_n * (1.0 - last.q_n);
    let tail_bound = survive / 2f64.powi(n_max as i32 + 1) * 6.0 / 5.0;
    Ok(TotalInfo {
        value: terms.iter().map(|t| t.i_ab_n).sum(),
        tail_bound,
        terms,
    })
}

/// Empirical statistics of one simulated round.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub n: u32,
    pub accounting: RoundAccounting,
    pub bits: usize,
    pub errors: usize,
    /// Input positions where Alice's and Bob's letters agree.
    pub same_letter: usize,
    pub eps_estimate: f64,
    pub eps_stderr: f64,
    pub p_succ: f64,
    pub p_succ_stderr: f64,
    pub p_err: f64,
    pub p_err_stderr: f64,
    /// Plug-in bits per transmitted pair, `(bits/N)·I_key(p̂_err)`.
    pub i_ab: f64,
    pub i_ab_stderr: f64,
    pub analytic: IterationStats,
}

impl IterationReport {
    pub const CSV_HEADER: [&'static str; 22] = [
        "n",
        "eps_n",
        "eps_n_est",
        "eps_n_stderr",
        "q_n",
        "p_succ",
        "p_succ_est",
        "p_succ_stderr",
        "p_err",
        "p_err_est",
        "p_err_stderr",
        "i_ab",
        "i_ab_est",
        "i_ab_stderr",
        "input",
        "keyed",
        "recycled",
        "discarded",
        "bits",
        "errors",
        "same_letter",
        "balanced",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let a = &self.analytic;
        let acc = &self.accounting;
        vec![
            self.n.to_string(),
            fmt_f(a.eps_n),
            fmt_f(self.eps_estimate),
            fmt_f(self.eps_stderr),
            fmt_f(a.q_n),
            fmt_f(a.p_succ_n),
            fmt_f(self.p_succ),
            fmt_f(self.p_succ_stderr),
            fmt_f(a.p_err_n),
            fmt_f(self.p_err),
            fmt_f(self.p_err_stderr),
            fmt_f(a.i_ab_n),
            fmt_f(self.i_ab),
            fmt_f(self.i_ab_stderr),
            acc.input.to_string(),
            acc.keyed.to_string(),
            acc.recycled.to_string(),
            acc.discarded.to_string(),
            self.bits.to_string(),
            self.errors.to_string(),
            self.same_letter.to_string(),
            acc.balanced().to_string(),
        ]
    }
}

pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

fn report_round(
    n: u32,
    n_pairs: usize,
    alice: &LetterSequence,
    bob: &LetterSequence,
    outcome: &SiftOutcome,
    analytic: IterationStats,
) -> IterationReport {
    let input = alice.len();
    let same_letter = alice
        .letters()
        .iter()
        .zip(bob.letters())
        .filter(|(a, b)| a == b)
        .count();
    let p_same = if input > 0 {
        same_letter as f64 / input as f64
    } else {
        0.0
    };
    let eps_stderr = if input > 0 {
        4.0 * (p_same * (1.0 - p_same) / input as f64).sqrt()
    } else {
        0.0
    };

    let bits = outcome.alice_bits.len();
    let errors = outcome
        .alice_bits
        .iter()
        .zip(&outcome.bob_bits)
        .filter(|(a, b)| a != b)
        .count();
    let scale = 2f64.powi(n as i32) / n_pairs as f64;
    let p_err = if bits > 0 {
        errors as f64 / bits as f64
    } else {
        0.0
    };
    let p_err_stderr = if bits > 0 {
        (p_err * (1.0 - p_err) / bits as f64).sqrt()
    } else {
        0.0
    };
    let rate = bits as f64 / n_pairs as f64;
    let info = i_key(p_err);
    // Poisson variance for the bit count is an upper bound for every round.
    let slope = if p_err > 0.0 && p_err < 1.0 {
        (p_err / (1.0 - p_err)).log2()
    } else {
        0.0
    };
    let var_count = info * info * bits as f64 / (n_pairs as f64).powi(2);
    let var_err = rate * rate * slope * slope * p_err_stderr * p_err_stderr;

    IterationReport {
        n,
        accounting: outcome.accounting,
        bits,
        errors,
        same_letter,
        eps_estimate: 4.0 * p_same,
        eps_stderr,
        p_succ: bits as f64 * scale,
        p_succ_stderr: (bits as f64).sqrt() * scale,
        p_err,
        p_err_stderr,
        i_ab: rate * info,
        i_ab_stderr: (var_count + var_err).sqrt(),
        analytic,
    }
}

/// Runs up to `max_iter` rounds on given sequences. `observer` sees each
/// round's inputs and outcome before the next round starts.
pub fn run_protocol_on<R, F>(
    eps: NoiseParameter,
    alice: LetterSequence,
    bob: LetterSequence,
    max_iter: u32,
    rng: &mut R,
    mut observer: F,
) -> Result<Vec<IterationReport>>
where
    R: Rng + ?Sized,
    F: FnMut(u32, &LetterSequence, &LetterSequence, &SiftOutcome),
{
    let n_pairs = alice.len();
    let mut reports = Vec::new();
    if n_pairs < 2 {
        return Ok(reports);
    }
    let (mut alice, mut bob) = (alice, bob);
    for n in 1..=max_iter {
        if alice.len() < 2 {
            break;
        }
        let outcome = sift_round(&alice, &bob, rng)?;
        observer(n, &alice, &bob, &outcome);
        let analytic = iteration_probabilities(eps, n)?;
        reports.push(report_round(n, n_pairs, &alice, &bob, &outcome, analytic));
        alice = outcome.alice_leftover;
        bob = outcome.bob_leftover;
    }
    Ok(reports)
}

/// Samples `n_pairs` Alice–Bob letter pairs at noise `eps` and runs the
/// protocol on them.
pub fn run_protocol<R: Rng + ?Sized>(
    eps: NoiseParameter,
    n_pairs: usize,
    max_iter: u32,
    rng: &mut R,
) -> Result<Vec<IterationReport>> {
    let (alice, bob) = sample_letter_pairs(eps, n_pairs, rng)?;
    run_protocol_on(eps, alice, bob, max_iter, rng, |_, _, _, _| {})
}

pub fn sample_letter_pairs<R: Rng + ?Sized>(
    eps: NoiseParameter,
    n_pairs: usize,
    rng: &mut R,
) -> Result<(LetterSequence, LetterSequence)> {
    let sampler = TableSampler::new(&joint_probs_ab(eps))?;
    let mut a = Vec::with_capacity(n_pairs);
    let mut b = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let flat = sampler.sample_flat(rng);
        a.push(Letter::from_index(flat / 4)?);
        b.push(Letter::from_index(flat % 4)?);
    }
    Ok((
        LetterSequence::from_letters(a),
        LetterSequence::from_letters(b),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::derive_rng;
    use Letter::*;

    fn eps(x: f64) -> NoiseParameter {
        NoiseParameter::new(x).unwrap()
    }

    #[test]
    fn grouping_bits_follow_rules() {
        // Bob (B,C) labelled 0, Alice A -> both write 1.
        let g = Grouping::from_bob_letters(B, C, 0).unwrap();
        assert_eq!(g.zero(), [B, C]);
        assert_eq!(g.one(), [A, D]);
        assert_eq!((g.alice_bit(A), g.bob_bit(B)), (1, 1));
        // Bob (A,C) labelled 0, Alice A -> error.
        let g = Grouping::from_bob_letters(A, C, 0).unwrap();
        assert_eq!((g.alice_bit(A), g.bob_bit(A)), (0, 1));
        assert!(Grouping::from_bob_letters(A, A, 0).is_err());
        assert!(Grouping::new([A, B], [A, C]).is_err());
    }

    #[test]
    fn same_letters_go_to_leftover() {
        let alice = LetterSequence::from_letters(vec![A, A]);
        let bob = LetterSequence::from_letters(vec![C, C]);
        let out = sift_round(&alice, &bob, &mut derive_rng(3, 0)).unwrap();
        assert!(out.alice_bits.is_empty());
        assert_eq!(out.alice_leftover.letters(), &[A]);
        assert_eq!(out.bob_leftover.letters(), &[C]);
        assert_eq!(out.alice_leftover.provenance()[0].depth, 2);
        assert_eq!(out.transcript.announcements[0].verdict, Verdict::Same);
    }

    #[test]
    fn anticorrelated_pair_agrees() {
        let alice = LetterSequence::from_letters(vec![A, A]);
        let bob = LetterSequence::from_letters(vec![B, C]);
        for seed in 0..8 {
            let out = sift_round(&alice, &bob, &mut derive_rng(seed, 0)).unwrap();
            assert_eq!(out.alice_bits, out.bob_bits);
            assert_eq!(out.alice_bits.len(), 1);
        }
    }

    #[test]
    fn misaligned_sequences_rejected() {
        let alice = LetterSequence::from_letters(vec![A, A, B]);
        let bob = LetterSequence::from_letters(vec![B, C]);
        assert!(sift_round(&alice, &bob, &mut derive_rng(0, 0)).is_err());
        assert!(LetterSequence::new(
            vec![A, B],
            vec![Provenance { origin: 0, depth: 1 }; 2]
        )
        .is_err());
    }

    #[test]
    fn residuals_are_discarded() {
        let alice = LetterSequence::from_letters(vec![A, B, C, D, A]);
        let bob = LetterSequence::from_letters(vec![B, A, D, C, C]);
        let out = sift_round(&alice, &bob, &mut derive_rng(0, 0)).unwrap();
        assert_eq!(out.accounting.discarded, 3);
        assert_eq!(out.transcript.announcements.len(), 1);
        assert!(out.accounting.balanced());
    }

    #[test]
    fn recursion_fixed_points_and_value() {
        assert_eq!(noise_recursion(eps(0.0)).value(), 0.0);
        assert!((noise_recursion(eps(1.0)).value() - 1.0).abs() < 1e-15);
        assert!((noise_recursion(eps(0.4)).value() - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_recycled_probabilities() {
        for x in [0.1, 0.4, 0.8] {
            let ps = x / 4.0;
            let pd = (4.0 - x) / 12.0;
            let ps_next = ps * ps / (ps * ps + 3.0 * pd * pd);
            assert!((noise_recursion(eps(x)).value() - 4.0 * ps_next).abs() < 1e-14);
        }
    }

    #[test]
    fn noiseless_iterations() {
        let s1 = iteration_probabilities(eps(0.0), 1).unwrap();
        assert!((s1.q_n - 2.0 / 3.0).abs() < 1e-15);
        assert!((s1.p_succ_n - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s1.p_err_n, 0.0);
        let s2 = iteration_probabilities(eps(0.0), 2).unwrap();
        assert!((s2.p_succ_n - 2.0 / 9.0).abs() < 1e-15);
        assert!((i_ab_n(eps(0.0), 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((i_ab_n(eps(0.0), 2).unwrap() - 1.0 / 18.0).abs() < 1e-15);
        assert!(iteration_probabilities(eps(0.0), 0).is_err());
    }

    #[test]
    fn p_err_routes_agree() {
        for i in 0..50 {
            let x = eps(i as f64 / 49.0);
            for n in 1..=6 {
                let rec = iteration_probabilities(x, n).unwrap().p_err_n;
                let closed = p_err_closed_form(x, n).unwrap();
                assert!((rec - closed).abs() < 1e-12, "eps={} n={n}", x.value());
            }
        }
    }

    #[test]
    fn i_key_values() {
        assert_eq!(i_key(0.0), 1.0);
        assert!(i_key(0.5).abs() < 1e-15);
        assert!((i_key(0.2) - i_key(0.8)).abs() < 1e-15);
    }

    #[test]
    fn totals() {
        let t = i_ab_total(eps(0.0), 12).unwrap();
        assert!((t.value - 0.4).abs() < 1e-6);
        assert!(t.tail_bound < 1e-6);
        assert!(i_ab_total(eps(1.0), 5).unwrap().value.abs() < 1e-15);
        let t2 = i_ab_total(eps(0.0), 2).unwrap();
        assert!((t2.value - (1.0 / 3.0 + 1.0 / 18.0)).abs() < 1e-15);
        assert!(t2.value + t2.tail_bound >= t.value);
    }

    #[test]
    fn noiseless_protocol_has_no_errors() {
        let reports = run_protocol(eps(0.0), 20_000, 3, &mut derive_rng(11, 0)).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert_eq!(r.errors, 0);
            assert!(r.accounting.balanced());
        }
        assert!(run_protocol(eps(0.1), 1, 3, &mut derive_rng(0, 0))
            .unwrap()
            .is_empty());
    }
}
