//! Acceptance criteria. Runs every criterion at its pinned tolerance and
//! prints one PASS/FAIL line each; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tetraqkd::channel::{
    accessible_info_ab, joint_probs_ab, reconstruct_state, rho_ab, tetra_povm, JointTable,
};
use tetraqkd::eve::{
    alice_eve_joint, alice_eve_table, eta, eta_from_table, eve_components, eve_letter_info,
    eve_povm4, eve_povm5, five_member_boundary, gram_law, optimize_mu, purification,
    PurificationParams,
};
use tetraqkd::harness::{simulate, triple_distribution, EveMeasurement, empirical_mi};
use tetraqkd::keygen::{i_ab_n, i_ab_total, i_key, iteration_probabilities, Grouping, Letter};
use tetraqkd::qmath::{born_joint, max_abs_diff, partial_trace, DensityOperator};
use tetraqkd::sampling::{derive_rng, TableSampler};
use tetraqkd::security::{i_ae_n, i_ae_n_born, six_state_iab, threshold, THRESHOLD_TOL};
use tetraqkd::{NoiseParameter, SEPARABLE_NOISE};

type Q = Ratio<i64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn noise(e: f64) -> NoiseParameter {
    NoiseParameter::new(e).unwrap()
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn within_sigmas(est: f64, target: f64, stderr: f64, k: f64) -> bool {
    (est - target).abs() <= k * stderr
}

fn accessible_information() -> Outcome {
    let v = accessible_info_ab(noise(0.0));
    let exact = (4.0f64 / 3.0).log2();
    let pass = (v - 0.415).abs() <= 1e-3 && (v - exact).abs() <= 1e-12;
    outcome(pass, format!("accessible_info_ab(0) = {v:.6}, target 0.415 ± 1e-3"))
}

fn efficiency_ladder() -> Outcome {
    let first = i_ab_n(noise(0.0), 1).unwrap();
    let two = i_ab_total(noise(0.0), 2).unwrap().value;
    let twelve = i_ab_total(noise(0.0), 12).unwrap().value;
    let pass = (first - 1.0 / 3.0).abs() <= f64::EPSILON
        && (two - 0.389).abs() <= 5e-4
        && (twelve - 0.400).abs() <= 5e-4;
    outcome(
        pass,
        format!("i_ab_n(0,1) = {first:.15}, total(0,2) = {two:.6}, total(0,12) = {twelve:.6}"),
    )
}

fn three_rounds_converged() -> Outcome {
    let mut worst = (0.0, 0.0);
    for e in grid(0.0, SEPARABLE_NOISE, 200) {
        let three = i_ab_total(noise(e), 3).unwrap().value;
        let twelve = i_ab_total(noise(e), 12).unwrap().value;
        let rel = (twelve - three).abs() / twelve;
        if rel > worst.1 {
            worst = (e, rel);
        }
    }
    outcome(
        worst.1 <= 1e-4,
        format!(
            "max relative shortfall of 3 rounds vs 12 = {:.4}% at eps = {:.4} (limit 0.01%)",
            100.0 * worst.1,
            worst.0
        ),
    )
}

fn six_state_gap() -> Outcome {
    let gap = |e: f64| i_ab_total(noise(e), 5).unwrap().value - six_state_iab(noise(e));
    let at_zero = gap(0.0);
    let at_sep = gap(SEPARABLE_NOISE);
    let ratio = at_zero / six_state_iab(noise(0.0));
    let shrinking = grid(0.0, SEPARABLE_NOISE, 100)
        .windows(2)
        .all(|w| gap(w[1]) < gap(w[0]));
    let pass = (at_zero - 0.066).abs() <= 1e-3 && at_sep.abs() <= 1e-3 && shrinking;
    outcome(
        pass,
        format!(
            "gap(0) = {at_zero:.6} ({:.1}% of six-state), gap(2/3) = {at_sep:.2e} (target 0 ± 1e-3), decreasing = {shrinking}",
            100.0 * ratio
        ),
    )
}

fn eavesdropper_channel() -> Outcome {
    let eta0 = eta(noise(0.0)).unwrap();
    let eta_sep = eta(noise(SEPARABLE_NOISE)).unwrap();
    let mut worst: f64 = 0.0;
    for e in grid(0.0, SEPARABLE_NOISE, 20) {
        for phi in [0.0, 0.7, 2.1] {
            let params = PurificationParams::new(noise(e), phi).unwrap();
            let born = alice_eve_table(&params, &eve_povm4(phi)).unwrap();
            worst = worst.max(born.max_abs_diff(&alice_eve_joint(noise(e)).unwrap()));
        }
    }
    let pass = eta0 == 1.0 && eta_sep == 0.0 && worst <= 1e-10;
    outcome(
        pass,
        format!("eta(0) = {eta0}, eta(2/3) = {eta_sep}, max Born deviation {worst:.2e}"),
    )
}

fn five_member_regime() -> Outcome {
    let below: Vec<f64> = grid(0.001, 0.17, 30);
    let above: Vec<f64> = grid(0.175, 0.66, 30);
    let mut below_ok = true;
    let mut max_rel = (0.0, 0.0);
    for &e in &below {
        let opt = optimize_mu(noise(e), 0.0).unwrap();
        below_ok &= opt.gain > 0.0;
        if opt.relative_gain() > max_rel.1 {
            max_rel = (e, opt.relative_gain());
        }
    }
    let mut above_max: f64 = 0.0;
    for &e in &above {
        above_max = above_max.max(optimize_mu(noise(e), 0.0).unwrap().gain);
    }
    let boundary = five_member_boundary(0.0, 0.05, 0.3, 1e-5).unwrap();
    let sign_ok = below_ok && above_max <= 1e-9;
    let boundary_ok = (boundary - 0.1725).abs() <= 0.005;
    let small_ok = max_rel.1 < 0.01;
    outcome(
        sign_ok && boundary_ok && small_ok,
        format!(
            "gain > 0 below: {below_ok}, max gain above = {above_max:.1e}, boundary = {boundary:.4}, max gain/I4 = {:.2}% at eps = {:.3} (limit 1%)",
            100.0 * max_rel.1,
            max_rel.0
        ),
    )
}

fn thresholds() -> Outcome {
    let t1 = threshold(1, THRESHOLD_TOL).unwrap();
    let t3 = threshold(3, THRESHOLD_TOL).unwrap();
    let t5 = threshold(5, THRESHOLD_TOL).unwrap();
    let pass = (t1 - 0.409).abs() <= 2e-3 && (t3 - 0.417).abs() <= 2e-3 && (t5 - t3).abs() < 1e-3;
    outcome(
        pass,
        format!("threshold(1) = {t1:.6}, threshold(3) = {t3:.6}, threshold(5) - threshold(3) = {:.1e}", t5 - t3),
    )
}

/// `p(b | a)` for the noisy singlet, in exact arithmetic.
fn conditional_bob(eps: Q, same: bool) -> Q {
    let four = Q::from_integer(4);
    if same {
        eps / four
    } else {
        (four - eps) / Q::from_integer(12)
    }
}

fn exhaustive_sifting() -> Outcome {
    let samples = [
        Q::from_integer(0),
        Q::new(1, 5),
        Q::new(1, 3),
        Q::new(2, 5),
        Q::new(2, 3),
        Q::new(9, 10),
        Q::from_integer(1),
    ];
    let mut all_ok = true;
    let mut float_err: f64 = 0.0;
    for eps in samples {
        let mut success = Q::from_integer(0);
        let mut error = Q::from_integer(0);
        for a in Letter::ALL {
            let pa = Q::new(1, 4);
            for b1 in Letter::ALL {
                for b2 in Letter::ALL {
                    if b1 == b2 {
                        continue;
                    }
                    let w = pa * conditional_bob(eps, a == b1) * conditional_bob(eps, a == b2);
                    for label in 0..2u8 {
                        let g = Grouping::from_bob_letters(b1, b2, label).unwrap();
                        let wl = w * Q::new(1, 2);
                        success += wl;
                        if g.alice_bit(a) != g.bob_bit(b1) {
                            error += wl;
                        }
                    }
                }
            }
        }
        let four = Q::from_integer(4);
        let two = Q::from_integer(2);
        let three = Q::from_integer(3);
        let expected_succ = (four - eps) * (two + eps) / Q::from_integer(12);
        let expected_err = three * eps / (four + two * eps);
        let p_err = error / success;
        all_ok &= success == expected_succ && p_err == expected_err;

        let e = *eps.numer() as f64 / *eps.denom() as f64;
        let stats = iteration_probabilities(noise(e), 1).unwrap();
        let as_f = |q: Q| *q.numer() as f64 / *q.denom() as f64;
        float_err = float_err
            .max((stats.p_succ_n - as_f(success)).abs())
            .max((stats.p_err_n - as_f(p_err)).abs());
    }
    outcome(
        all_ok && float_err <= 1e-14,
        format!("rational enumeration exact: {all_ok}; float routes within {float_err:.1e}"),
    )
}

fn monte_carlo() -> Outcome {
    let n_pairs = 1_000_000;
    let mut failures = Vec::new();
    let mut checks = 0;
    for (stream, e) in [0.0, 0.2, 0.4].into_iter().enumerate() {
        let eps = noise(e);
        let triple = triple_distribution(eps, 0.0, EveMeasurement::Four).unwrap();
        let mut rng = derive_rng(2024, stream as u64);
        let sim = simulate(eps, &triple, n_pairs, 3, &mut rng).unwrap();
        let mut check = |name: String, ok: bool| {
            checks += 1;
            if !ok {
                failures.push(name);
            }
        };
        for (rep, counts) in sim.reports.iter().zip(&sim.key_counts) {
            let a = &rep.analytic;
            if rep.n <= 2 {
                check(
                    format!("p_err eps={e} n={}", rep.n),
                    within_sigmas(rep.p_err, a.p_err_n, rep.p_err_stderr, 4.0),
                );
            }
            check(
                format!("i_ab eps={e} n={}", rep.n),
                within_sigmas(rep.i_ab, a.i_ab_n, rep.i_ab_stderr, 4.0),
            );
            let mi = empirical_mi(counts, 200, &mut rng).unwrap();
            let target = i_key(a.p_err_n);
            check(
                format!("key-bit MI eps={e} n={}", rep.n),
                (mi.bits - target).abs() <= 4.0 * mi.stderr + mi.bias,
            );
            check(
                format!("leftover noise eps={e} n={}", rep.n),
                within_sigmas(rep.eps_estimate, a.eps_n, rep.eps_stderr, 4.0),
            );
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} of {checks} checks within 4 sigma {:?}", checks - failures.len(), failures),
    )
}

fn purification_contracts() -> Outcome {
    let mut trace_err: f64 = 0.0;
    let mut gram_err: f64 = 0.0;
    for e in grid(0.0, SEPARABLE_NOISE, 100) {
        for phi in [0.0, 1.3] {
            let params = PurificationParams::new(noise(e), phi).unwrap();
            let rho = DensityOperator::from_pure(&purification(&params));
            let ab = partial_trace(&rho, &[0, 1]).unwrap();
            trace_err = trace_err.max(ab.max_abs_diff(&rho_ab(noise(e))));
            gram_err = gram_err.max(max_abs_diff(
                &eve_components(&params).gram(),
                &gram_law(noise(e)),
            ));
        }
    }

    let mut gauge_err: f64 = 0.0;
    for e in grid(0.02, 0.64, 10) {
        let eps = noise(e);
        let base = PurificationParams::new(eps, 0.0).unwrap();
        let base_eta = eta(eps).unwrap();
        let base_info4 = eve_letter_info(&base, &eve_povm4(0.0)).unwrap();
        let base_info5 = eve_letter_info(&base, &eve_povm5(0.0, 0.12).unwrap()).unwrap();
        let base_iae: Vec<f64> = (1..=3).map(|n| i_ae_n(eps, n).unwrap()).collect();
        for phi in [0.4, 1.7, -2.9] {
            let p = PurificationParams::new(eps, phi).unwrap();
            let table = alice_eve_table(&p, &eve_povm4(phi)).unwrap();
            gauge_err = gauge_err
                .max((eta_from_table(&table).unwrap() - base_eta).abs())
                .max((eve_letter_info(&p, &eve_povm4(phi)).unwrap() - base_info4).abs())
                .max(
                    (eve_letter_info(&p, &eve_povm5(phi, 0.12).unwrap()).unwrap() - base_info5)
                        .abs(),
                );
            for (n, b) in (1..=3).zip(&base_iae) {
                gauge_err = gauge_err.max((i_ae_n_born(&p, n).unwrap() - b).abs());
            }
        }
    }
    let pass = trace_err <= 1e-10 && gram_err <= 1e-10 && gauge_err <= 1e-10;
    outcome(
        pass,
        format!(
            "partial trace {trace_err:.1e}, Gram {gram_err:.1e}, gauge invariance {gauge_err:.1e}"
        ),
    )
}

fn random_density(rng: &mut ChaCha8Rng) -> DensityOperator {
    let g = DMatrix::<Complex64>::from_fn(4, 4, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m / Complex64::new(tr, 0.0)).unwrap()
}

fn tomography() -> Outcome {
    let povm = tetra_povm();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut exact_err: f64 = 0.0;
    let mut states = Vec::new();
    for _ in 0..100 {
        let rho = random_density(&mut rng);
        let table = born_joint(&rho, &[(&povm, &[0]), (&povm, &[1])]).unwrap();
        exact_err = exact_err.max(reconstruct_state(&table).unwrap().max_abs_diff(&rho));
        states.push((rho, table));
    }

    let shots = 1_000_000;
    let mut shot_err: f64 = 0.0;
    let mut candidates: Vec<(DensityOperator, JointTable)> = states.into_iter().take(4).collect();
    candidates.push((rho_ab(noise(0.2)), joint_probs_ab(noise(0.2))));
    for (i, (rho, table)) in candidates.iter().enumerate() {
        let sampler = TableSampler::new(table).unwrap();
        let mut r = derive_rng(77, i as u64);
        let mut counts = vec![0u64; 16];
        for _ in 0..shots {
            counts[sampler.sample_flat(&mut r)] += 1;
        }
        let empirical =
            JointTable::from_counts(table.parties().to_vec(), table.labels().to_vec(), &counts)
                .unwrap();
        shot_err = shot_err.max(reconstruct_state(&empirical).unwrap().max_abs_diff(rho));
    }
    outcome(
        exact_err <= 1e-10 && shot_err < 5e-3,
        format!("exact round trip {exact_err:.1e}; 1e6-shot max entry deviation {shot_err:.2e} (limit 5e-3)"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let sec = Duration::from_secs;
    let criteria: [Criterion; 11] = [
        (1, "accessible information", accessible_information, sec(1)),
        (2, "efficiency ladder at zero noise", efficiency_ladder, sec(1)),
        (3, "three rounds within 0.01% of the limit", three_rounds_converged, sec(1)),
        (4, "gap to the six-state protocol", six_state_gap, sec(1)),
        (5, "eavesdropper channel", eavesdropper_channel, sec(1)),
        (6, "5-member POVM regime", five_member_regime, sec(10)),
        (7, "noise thresholds", thresholds, sec(30)),
        (8, "exhaustive sifting oracle", exhaustive_sifting, sec(1)),
        (9, "Monte Carlo cross-validation", monte_carlo, sec(60)),
        (10, "purification contracts", purification_contracts, sec(5)),
        (11, "tomography round trip", tomography, sec(30)),
    ];
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} {name}: {} [{:.2?}{}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed,
            if in_time { "" } else { ", over time budget" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
