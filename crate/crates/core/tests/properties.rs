use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use tetraqkd::channel::{joint_probs_ab, reconstruct_state, tetra_povm};
use tetraqkd::eve::PurificationParams;
use tetraqkd::keygen::{
    iteration_probabilities, noise_recursion, p_err_closed_form, sift_round, Grouping, Letter,
    LetterSequence,
};
use tetraqkd::qmath::{born_joint, DensityOperator};
use tetraqkd::sampling::derive_rng;
use tetraqkd::security::{i_ae_n, i_ae_n_born};
use tetraqkd::{NoiseParameter, SEPARABLE_NOISE};

fn density_from(entries: &[(f64, f64)]) -> DensityOperator {
    let g = DMatrix::from_fn(4, 4, |r, c| {
        let (re, im) = entries[r * 4 + c];
        Complex64::new(re, im)
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m / Complex64::new(tr, 0.0)).unwrap()
}

fn letter() -> impl Strategy<Value = Letter> {
    (0usize..4).prop_map(|i| Letter::from_index(i).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reconstruction_inverts_born_rule(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)
            .prop_filter("non-degenerate", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
    ) {
        let rho = density_from(&entries);
        let povm = tetra_povm();
        let table = born_joint(&rho, &[(&povm, &[0]), (&povm, &[1])]).unwrap();
        let back = reconstruct_state(&table).unwrap();
        prop_assert!(back.max_abs_diff(&rho) < 1e-10);
    }

    #[test]
    fn round_accounting_balances(
        pairs in prop::collection::vec((letter(), letter()), 0..400),
        seed in any::<u64>(),
    ) {
        let (a, b): (Vec<Letter>, Vec<Letter>) = pairs.into_iter().unzip();
        let alice = LetterSequence::from_letters(a);
        let bob = LetterSequence::from_letters(b);
        let out = sift_round(&alice, &bob, &mut derive_rng(seed, 0)).unwrap();
        let acc = out.accounting;
        prop_assert_eq!(acc.keyed + acc.recycled + acc.discarded, acc.input);
        prop_assert!(acc.discarded <= 4);
        prop_assert_eq!(out.alice_bits.len() * 2, acc.keyed);
        prop_assert_eq!(out.alice_leftover.len() * 2, acc.recycled);

        // every position appears exactly once in the transcript
        let mut seen = vec![false; alice.len()];
        for ann in &out.transcript.announcements {
            let (i, j) = ann.positions;
            prop_assert_eq!(alice.letters()[i], alice.letters()[j]);
            for p in [i, j] {
                prop_assert!(!seen[p]);
                seen[p] = true;
            }
        }
        for &p in &out.transcript.discarded {
            prop_assert!(!seen[p]);
            seen[p] = true;
        }
        prop_assert!(seen.into_iter().all(|s| s));

        // leftovers carry unique origins one level deeper
        let mut origins: Vec<usize> = out.alice_leftover.provenance().iter().map(|p| p.origin).collect();
        prop_assert!(out.alice_leftover.provenance().iter().all(|p| p.depth == 2));
        origins.sort_unstable();
        origins.dedup();
        prop_assert_eq!(origins.len(), out.alice_leftover.len());
    }

    #[test]
    fn bits_agree_unless_alice_holds_a_bob_letter(
        a in letter(), b1 in letter(), b2 in letter(), label in 0u8..2,
    ) {
        prop_assume!(b1 != b2);
        let g = Grouping::from_bob_letters(b1, b2, label).unwrap();
        let agree = g.alice_bit(a) == g.bob_bit(b1);
        prop_assert_eq!(agree, a != b1 && a != b2);
        prop_assert_eq!(g.bob_bit(b1), g.bob_bit(b2));
    }

    #[test]
    fn recursion_stays_in_range_and_contracts(e in 0.0f64..=1.0) {
        let next = noise_recursion(NoiseParameter::new(e).unwrap()).value();
        prop_assert!((0.0..=1.0).contains(&next));
        if e > 0.0 && e < 1.0 {
            prop_assert!(next < e);
        }
    }

    #[test]
    fn p_err_routes_agree(e in 0.0f64..=1.0, n in 1u32..8) {
        let eps = NoiseParameter::new(e).unwrap();
        let rec = iteration_probabilities(eps, n).unwrap();
        prop_assert!((rec.p_err_n - p_err_closed_form(eps, n).unwrap()).abs() < 1e-12);
        prop_assert!(rec.q_n >= 2.0 / 3.0 - 1e-15);
        prop_assert!((0.0..=1.0).contains(&rec.p_succ_n));
    }

    #[test]
    fn gauge_phase_does_not_change_eve_information(
        e in 0.0f64..SEPARABLE_NOISE, phi in -6.3f64..6.3, n in 1u32..4,
    ) {
        let eps = NoiseParameter::new(e).unwrap();
        let params = PurificationParams::new(eps, phi).unwrap();
        let born = i_ae_n_born(&params, n).unwrap();
        prop_assert!((born - i_ae_n(eps, n).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn werner_table_is_normalized_and_symmetric(e in 0.0f64..=1.0) {
        let t = joint_probs_ab(NoiseParameter::new(e).unwrap());
        prop_assert!(t.is_normalized());
        for k in 0..4 {
            for l in 0..4 {
                prop_assert_eq!(t.get(&[k, l]).unwrap(), t.get(&[l, k]).unwrap());
            }
        }
    }
}
