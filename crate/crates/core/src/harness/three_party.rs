//! Exact three-party outcome statistics and sampled protocol runs with
//! Eve's letters attached to every transmitted pair.

use rand::Rng;

use crate::channel::{joint_probs_ab, JointTable, NoiseParameter};
use crate::error::{Error, Result};
use crate::eve::{
    alice_eve_joint, eve_povm4, eve_povm5, optimize_mu, purification, PurificationParams,
};
use crate::harness::config::MuPolicy;
use crate::harness::estimate::CountTable;
use crate::keygen::{
    run_protocol_on, Grouping, Letter, LetterSequence, Verdict, IterationReport,
};
use crate::qmath::{born_joint, DensityOperator, Povm, OPERATOR_TOL};
use crate::sampling::TableSampler;
use crate::channel::SEPARABLE_NOISE;

/// Eve's measurement on each ancilla pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveMeasurement {
    Four,
    Five { mu: f64 },
}

impl EveMeasurement {
    /// Resolves a policy at one noise value. The optimal μ is only searched
    /// strictly inside `(0, 2/3)`; at the endpoints it is zero.
    pub fn from_policy(policy: MuPolicy, eps: NoiseParameter, phi: f64) -> Result<Self> {
        Ok(match policy {
            MuPolicy::Four => EveMeasurement::Four,
            MuPolicy::Fixed(mu) => EveMeasurement::Five { mu },
            MuPolicy::Optimal => {
                let e = eps.value();
                let mu = if e > 0.0 && e < SEPARABLE_NOISE {
                    optimize_mu(eps, phi)?.mu
                } else {
                    0.0
                };
                EveMeasurement::Five { mu }
            }
        })
    }

    pub fn povm(&self, phi: f64) -> Result<Povm> {
        match *self {
            EveMeasurement::Four => Ok(eve_povm4(phi)),
            EveMeasurement::Five { mu } => eve_povm5(phi, mu),
        }
    }

    pub fn outcomes(&self) -> usize {
        match self {
            EveMeasurement::Four => 4,
            EveMeasurement::Five { .. } => 5,
        }
    }
}

/// Born-rule table `p(a, b, e)` over the purification, shape `4 × 4 × K`.
///
/// The Alice–Bob marginal is checked against the two-party table and, for
/// the 4-member measurement, the Alice–Eve marginal against the η form;
/// a deviation above 1e-10 is an [`Error::Invariant`].
pub fn triple_distribution(
    eps: NoiseParameter,
    phi: f64,
    eve: EveMeasurement,
) -> Result<JointTable> {
    let params = PurificationParams::new(eps, phi)?;
    let state = DensityOperator::from_pure(&purification(&params));
    let tetra = crate::channel::tetra_povm();
    let eve_povm = eve.povm(phi)?;
    let table = born_joint(
        &state,
        &[(&tetra, &[0]), (&tetra, &[1]), (&eve_povm, &[2, 3])],
    )?;

    let ab_err = table.marginal(&[0, 1])?.max_abs_diff(&joint_probs_ab(eps));
    if ab_err > OPERATOR_TOL {
        return Err(Error::Invariant(format!(
            "Alice-Bob marginal deviates by {ab_err:e}"
        )));
    }
    if eve == EveMeasurement::Four && eps.value() <= SEPARABLE_NOISE {
        let ae_err = table.marginal(&[0, 2])?.max_abs_diff(&alice_eve_joint(eps)?);
        if ae_err > OPERATOR_TOL {
            return Err(Error::Invariant(format!(
                "Alice-Eve marginal deviates by {ae_err:e}"
            )));
        }
    }
    Ok(table)
}

/// One transmitted pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRecord {
    pub index: usize,
    pub alice: Letter,
    pub bob: Letter,
    /// Index into Eve's POVM; 4 is the fifth outcome.
    pub eve: usize,
}

/// `n_pairs` i.i.d. draws from a triple table.
pub fn sample_run<R: Rng + ?Sized>(
    triple: &JointTable,
    n_pairs: usize,
    rng: &mut R,
) -> Result<Vec<SampleRecord>> {
    let shape = triple.shape();
    if shape.len() != 3 || shape[0] != 4 || shape[1] != 4 {
        return Err(Error::MalformedTable(format!(
            "expected a 4x4xK table, got {shape:?}"
        )));
    }
    let sampler = TableSampler::new(triple)?;
    (0..n_pairs)
        .map(|index| {
            let o = sampler.sample(rng);
            Ok(SampleRecord {
                index,
                alice: Letter::from_index(o[0])?,
                bob: Letter::from_index(o[1])?,
                eve: o[2],
            })
        })
        .collect()
}

/// Partition index of Bob's announced grouping, matching
/// [`crate::security::LetterGrouping::ALL`]: the group containing A is
/// {A,B}, {A,C} or {A,D}.
fn partition_index(letters_with_a: [usize; 2]) -> usize {
    let partner = if letters_with_a[0] == 0 {
        letters_with_a[1]
    } else {
        letters_with_a[0]
    };
    partner - 1
}

fn grouping_partition(g: &Grouping) -> usize {
    let zero = g.zero();
    let group = if zero.contains(&Letter::A) { zero } else { g.one() };
    partition_index([group[0].index(), group[1].index()])
}

/// Number of columns of Eve's round-one view: her two letters, the
/// announced partition, and the label of the group holding A.
pub fn view_columns(eve_outcomes: usize) -> usize {
    eve_outcomes * eve_outcomes * 6
}

fn view_column(k: usize, e1: usize, e2: usize, partition: usize, label: u8) -> usize {
    ((e1 * k + e2) * 3 + partition) * 2 + label as usize
}

/// Exact mutual information between a round-one key bit and everything Eve
/// observes about it: her letters on both positions of the pair and Bob's
/// labelled partition. Bob's letters condition the pair through the
/// requirement that they differ, so Eve's letters are weighted by
/// `p(a, b₁, e₁)·p(a, b₂, e₂)` rather than by the Alice–Eve marginal alone.
///
/// The labels are uniform and independent of everything else, so the
/// information equals that between Eve's letters plus the partition and
/// whether Alice's letter lies in the group containing A.
pub fn exact_view_keybit_info(triple: &JointTable) -> Result<f64> {
    let shape = triple.shape();
    let k = shape[2];
    let p = triple.probs();
    let at = |a: usize, b: usize, e: usize| p[(a * 4 + b) * k + e];
    // y = whether Alice's letter shares a group with A.
    let mut joint = vec![0.0; 2 * k * k * 3];
    for a in 0..4 {
        for b1 in 0..4 {
            for b2 in 0..4 {
                if b1 == b2 {
                    continue;
                }
                let with_a = if b1 == 0 || b2 == 0 {
                    [b1.min(b2), b1.max(b2)]
                } else {
                    let rest: Vec<usize> = (0..4).filter(|&l| l != b1 && l != b2).collect();
                    [rest[0], rest[1]]
                };
                let part = partition_index(with_a);
                let y = usize::from(with_a.contains(&a));
                for e1 in 0..k {
                    for e2 in 0..k {
                        joint[y * k * k * 3 + (e1 * k + e2) * 3 + part] +=
                            at(a, b1, e1) * at(a, b2, e2);
                    }
                }
            }
        }
    }
    let total: f64 = joint.iter().sum();
    let cols = k * k * 3;
    let table = JointTable::new(
        vec!["y".into(), "view".into()],
        vec![
            vec!["0".into(), "1".into()],
            (0..cols).map(|c| c.to_string()).collect(),
        ],
        joint.iter().map(|v| v / total).collect(),
    )?;
    crate::channel::mutual_information(&table)
}

/// Counts collected from one simulated run.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub reports: Vec<IterationReport>,
    /// Alice bit × Bob bit, per round.
    pub key_counts: Vec<CountTable>,
    /// Alice's round-one bit × Eve's view (see [`view_columns`]).
    pub eve_view_counts: CountTable,
}

/// Samples a triple run and executes the protocol on the Alice and Bob
/// letters while recording what Eve saw for each round-one key bit.
pub fn simulate<R: Rng + ?Sized>(
    eps: NoiseParameter,
    triple: &JointTable,
    n_pairs: usize,
    max_iter: u32,
    rng: &mut R,
) -> Result<SimulationOutcome> {
    let records = sample_run(triple, n_pairs, rng)?;
    let k = triple.shape()[2];
    let eve: Vec<usize> = records.iter().map(|r| r.eve).collect();
    let alice = LetterSequence::from_letters(records.iter().map(|r| r.alice).collect());
    let bob = LetterSequence::from_letters(records.iter().map(|r| r.bob).collect());

    let mut key_counts = Vec::new();
    let mut eve_view_counts = CountTable::zeros(2, view_columns(k));
    let reports = run_protocol_on(eps, alice, bob, max_iter, rng, |n, a_seq, _, out| {
        let mut ab = CountTable::zeros(2, 2);
        for (&x, &y) in out.alice_bits.iter().zip(&out.bob_bits) {
            ab.add(x as usize, y as usize);
        }
        key_counts.push(ab);
        if n != 1 {
            return;
        }
        let distinct = out
            .transcript
            .announcements
            .iter()
            .filter_map(|ann| match ann.verdict {
                Verdict::Distinct(g) => Some((ann.positions, g)),
                Verdict::Same => None,
            });
        let prov = a_seq.provenance();
        for (&bit, ((i, j), g)) in out.alice_bits.iter().zip(distinct) {
            let (e1, e2) = (eve[prov[i].origin], eve[prov[j].origin]);
            let col = view_column(k, e1, e2, grouping_partition(&g), g.label_of(Letter::A));
            eve_view_counts.add(bit as usize, col);
        }
    })?;
    Ok(SimulationOutcome {
        reports,
        key_counts,
        eve_view_counts,
    })
}

/// Monte Carlo of the independent-letter model behind the analytic Eve
/// information: Alice's letter uniform, `2^n` Eve letters drawn from
/// `q(e|a)`, key bit 0 for A or B. Columns enumerate Eve's sequences.
pub fn sample_independent_model<R: Rng + ?Sized>(
    eta: f64,
    n: u32,
    samples: usize,
    rng: &mut R,
) -> Result<CountTable> {
    if n == 0 {
        return Err(Error::ZeroIteration);
    }
    if n > 3 {
        return Err(Error::IterationTooLarge { n, max: 3 });
    }
    let len = 1usize << n;
    let cols = 4usize.pow(len as u32);
    let mut table = CountTable::zeros(2, cols);
    let q_same = eta / 4.0;
    for _ in 0..samples {
        let a: usize = rng.random_range(0..4);
        let mut col = 0;
        for _ in 0..len {
            let e = if rng.random::<f64>() < q_same {
                a
            } else {
                let off: usize = rng.random_range(1..4);
                (a + off) % 4
            };
            col = col * 4 + e;
        }
        table.add(usize::from(a >= 2), col);
    }
    Ok(table)
}
