//! The eavesdropper's worst-case source: a four-qubit purification of the
//! noisy singlet (Alice, Bob, Eve₁, Eve₂), the conditional states of Eve's
//! ancilla, and her single-ancilla measurements.

use crate::channel::{
    mutual_information, tetra_form_table, tetra_povm, JointTable, NoiseParameter, SEPARABLE_NOISE,
};
use crate::error::{Error, Result};
use crate::qmath::{
    c, identity, kron, letter_labels, max_abs_diff, partial_trace, r, singlet, tetra_states,
    tetrahedron_vectors, CMatrix, CVector, DensityOperator, Povm, PureState, TetraStates,
    OPERATOR_TOL, SCALAR_TOL,
};
use crate::roots::{bisect_predicate, golden_section_max};

/// Qubits held by Eve inside the purification.
pub const EVE_QUBITS: [usize; 2] = [2, 3];

/// Gains at or below this are treated as "no gain" by [`optimize_mu`].
pub const GAIN_FLOOR: f64 = 1e-10;

/// Search tolerance on μ.
pub const MU_TOL: f64 = 1e-6;

/// Noise and gauge phase of the purification.
///
/// `β = √ε` is real and `α + β/2 = e^{iφ}√(1 − 3ε/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurificationParams {
    eps: NoiseParameter,
    phi: f64,
}

impl PurificationParams {
    pub fn new(eps: NoiseParameter, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "phi",
                value: phi,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { eps, phi })
    }

    pub fn eps(&self) -> NoiseParameter {
        self.eps
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn beta(&self) -> f64 {
        self.eps.value().sqrt()
    }

    pub fn alpha(&self) -> num_complex::Complex64 {
        let mag = (1.0 - 0.75 * self.eps.value()).sqrt();
        c(mag * self.phi.cos(), mag * self.phi.sin()) - r(self.beta() / 2.0)
    }

    /// Above 2/3 the construction is still a valid state, but the shared
    /// state is separable and no key is possible.
    pub fn beyond_separable(&self) -> bool {
        self.eps.value() > SEPARABLE_NOISE
    }
}

/// `α|s₁₂⟩|s₃₄⟩ + β|s₁₃⟩|s₂₄⟩`.
pub fn purification(params: &PurificationParams) -> PureState {
    let ss = singlet().tensor(&singlet()).expect("four qubits");
    let crossed = ss.permute_qubits(&[0, 2, 1, 3]).expect("valid permutation");
    let amps = ss.amplitudes() * params.alpha() + crossed.amplitudes() * r(params.beta());
    let amps: Vec<_> = amps.iter().copied().collect();
    PureState::new(amps).expect("purification is normalized")
}

fn tetra() -> TetraStates {
    tetra_states(&tetrahedron_vectors()).expect("standard tetrahedron")
}

/// Eve's four unnormalized ancilla components `|E_k⟩`, with
/// `|S_ε⟩ = Σ_l |l, l̄⟩|E_l⟩`.
#[derive(Debug, Clone)]
pub struct EveAncillaSet {
    components: [PureState; 4],
}

impl EveAncillaSet {
    pub fn component(&self, k: usize) -> &PureState {
        &self.components[k]
    }

    /// `G_kl = ⟨E_k|E_l⟩`.
    pub fn gram(&self) -> CMatrix {
        CMatrix::from_fn(4, 4, |k, l| self.components[k].inner(&self.components[l]))
    }

    /// `Σ_l |l, l̄⟩ ⊗ |E_l⟩`.
    pub fn recombine(&self) -> PureState {
        let st = tetra();
        let mut amps = CVector::zeros(16);
        for l in 0..4 {
            amps += st
                .pair(l)
                .tensor(&self.components[l])
                .expect("four qubits")
                .amplitudes();
        }
        PureState::from_vector(amps, false).expect("16 amplitudes")
    }
}

/// `|E_k⟩ = α/(2√2)|s⟩ − (β/2)(|k̄k⟩ + ½|kk̄⟩)`.
pub fn eve_components(params: &PurificationParams) -> EveAncillaSet {
    let st = tetra();
    let s = singlet();
    let alpha = params.alpha();
    let beta = params.beta();
    let components: Vec<PureState> = (0..4)
        .map(|k| {
            let v = s.amplitudes() * (alpha / 8f64.sqrt())
                - (st.pair_flipped(k).amplitudes() + st.pair(k).amplitudes() * r(0.5))
                    * r(beta / 2.0);
            PureState::from_vector(v, false).expect("two qubits")
        })
        .collect();
    EveAncillaSet {
        components: components.try_into().expect("four components"),
    }
}

/// Expected Gram matrix `(2−3ε)/16 + (3ε/8)δ_kl`.
pub fn gram_law(eps: NoiseParameter) -> CMatrix {
    let e = eps.value();
    CMatrix::from_fn(4, 4, |k, l| {
        r((2.0 - 3.0 * e) / 16.0 + if k == l { 3.0 * e / 8.0 } else { 0.0 })
    })
}

/// Eve's ancilla state given Alice's outcome `k` (zero-based), trace 1/4:
/// `(|β|²/8)|k̄k̄⟩⟨k̄k̄| + ¼ (α|s⟩ − β/√2 |k̄k⟩)(h.c.)`.
pub fn conditional_ancilla(params: &PurificationParams, k: usize) -> Result<DensityOperator> {
    if k >= 4 {
        return Err(Error::InvalidOutcome { index: k, len: 4 });
    }
    let st = tetra();
    let beta = params.beta();
    let bar_bar = st.flipped(k).tensor(st.flipped(k)).expect("two qubits");
    let v = singlet().amplitudes() * params.alpha()
        - st.pair_flipped(k).amplitudes() * r(beta / 2f64.sqrt());
    let m = bar_bar.projector() * r(beta * beta / 8.0) + (&v * v.adjoint()) * r(0.25);
    DensityOperator::new(m)
}

/// Which of the two legitimate parties the conditioning outcome belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// `tr_{A&B}[(P_k on party)|S_ε⟩⟨S_ε|]`, computed by brute-force partial trace.
pub fn conditional_ancilla_traced(
    params: &PurificationParams,
    party: Party,
    k: usize,
) -> Result<DensityOperator> {
    let povm = tetra_povm();
    let pk = povm.element(k)?;
    let local = match party {
        Party::Alice => kron(pk, &identity(2)),
        Party::Bob => kron(&identity(2), pk),
    };
    let op = kron(&local, &identity(4));
    let rho = DensityOperator::from_pure(&purification(params));
    let projected = DensityOperator::hermitian(
        (&op * rho.matrix() + rho.matrix() * &op) * r(0.5),
    )?;
    partial_trace(&projected, &EVE_QUBITS)
}

fn eve_vectors(phi: f64) -> Vec<CVector> {
    let st = tetra();
    let e_minus = c(phi.cos(), -phi.sin());
    let a = (r(1.0) + e_minus * 3f64.sqrt()) * 0.5;
    let b = e_minus * 1.5f64.sqrt();
    (0..4)
        .map(|l| singlet().amplitudes() * a + st.pair_flipped(l).amplitudes() * b)
        .collect()
}

/// Eve's 4-member projective measurement `M_l = |e_l⟩⟨e_l|` with
/// `|e_l⟩ = ((1+√3e^{−iφ})/2)|s⟩ + √(3/2)e^{−iφ}|l̄ l⟩`.
pub fn eve_povm4(phi: f64) -> Povm {
    let elements = eve_vectors(phi).iter().map(|e| e * e.adjoint()).collect();
    Povm::new(elements, letter_labels(4)).expect("Eve's 4-member POVM is complete")
}

/// The 5-member family: `|e_j⟩ → |e_j⟩ − μΣ_l|e_l⟩`,
/// `|e_5⟩ = √(2μ − 4μ²)Σ_l|e_l⟩`, for `μ ∈ [0, 1/2]`.
pub fn eve_povm5(phi: f64, mu: f64) -> Result<Povm> {
    if !(0.0..=0.5).contains(&mu) {
        return Err(Error::ParameterOutOfRange {
            name: "mu",
            value: mu,
            lo: 0.0,
            hi: 0.5,
        });
    }
    let base = eve_vectors(phi);
    let total: CVector = base.iter().sum();
    let mut vectors: Vec<CVector> = base.iter().map(|e| e - &total * r(mu)).collect();
    vectors.push(&total * r((2.0 * mu - 4.0 * mu * mu).max(0.0).sqrt()));
    let elements = vectors.iter().map(|e| e * e.adjoint()).collect();
    Povm::new(elements, letter_labels(5))
}

/// Alice–Eve table `tr[ρ_E^(k) M_m]` from the conditional ancilla states.
pub fn alice_eve_table(params: &PurificationParams, povm: &Povm) -> Result<JointTable> {
    if povm.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: povm.dim(),
        });
    }
    let mut probs = Vec::with_capacity(4 * povm.len());
    for k in 0..4 {
        let rho = conditional_ancilla(params, k)?;
        for m in povm.elements() {
            probs.push(rho.expectation(m).max(0.0));
        }
    }
    JointTable::new(
        vec!["alice".into(), "eve".into()],
        vec![letter_labels(4), povm.labels().to_vec()],
        probs,
    )
}

/// Alice–Eve mutual information of a single ancilla measured with `povm`.
pub fn eve_letter_info(params: &PurificationParams, povm: &Povm) -> Result<f64> {
    mutual_information(&alice_eve_table(params, povm)?)
}

/// Result of the 5-member μ search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    pub mu: f64,
    /// `I₅(μ*) − I₄`, zero when the 4-member POVM is optimal.
    pub gain: f64,
    pub info4: f64,
    pub info5: f64,
}

impl MuOptimum {
    pub fn relative_gain(&self) -> f64 {
        if self.info4 > 0.0 {
            self.gain / self.info4
        } else {
            0.0
        }
    }
}

/// Best μ for the 5-member POVM: a coarse scan on `[0, 1/2]` followed by
/// golden-section refinement around the best grid point.
pub fn optimize_mu(eps: NoiseParameter, phi: f64) -> Result<MuOptimum> {
    let e = eps.value();
    if !(e > 0.0 && e < SEPARABLE_NOISE) {
        return Err(Error::NoiseOutOfDomain {
            eps: e,
            lo: 0.0,
            hi: SEPARABLE_NOISE,
        });
    }
    let params = PurificationParams::new(eps, phi)?;
    let info4 = eve_letter_info(&params, &eve_povm4(phi))?;
    let info5 = |mu: f64| eve_letter_info(&params, &eve_povm5(phi, mu)?);

    const GRID: usize = 20;
    let step = 0.5 / GRID as f64;
    let mut best = (0.0, info4);
    for i in 1..=GRID {
        let mu = i as f64 * step;
        let v = info5(mu)?;
        if v > best.1 {
            best = (mu, v);
        }
    }
    let lo = (best.0 - step).max(0.0);
    let hi = (best.0 + step).min(0.5);
    let (mu, v) = golden_section_max(info5, lo, hi, MU_TOL)?;
    let gain = v - info4;
    Ok(if gain > GAIN_FLOOR {
        MuOptimum {
            mu,
            gain,
            info4,
            info5: v,
        }
    } else {
        MuOptimum {
            mu: 0.0,
            gain: 0.0,
            info4,
            info5: info4,
        }
    })
}

/// Noise level below which the 5-member POVM beats the 4-member one,
/// by bisection on `gain > 0` within `[lo, hi]`.
pub fn five_member_boundary(phi: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect_predicate(
        |e| Ok(optimize_mu(NoiseParameter::new(e)?, phi)?.gain > 0.0),
        lo,
        hi,
        tol,
    )
}

/// Alice–Eve noise `η = (√(1−3ε/4) − √(3ε/4))²` on the physical branch
/// `ε ∈ [0, 2/3]`.
pub fn eta(eps: NoiseParameter) -> Result<f64> {
    let e = eps.value();
    if e > SEPARABLE_NOISE + SCALAR_TOL {
        return Err(Error::NoiseOutOfDomain {
            eps: e,
            lo: 0.0,
            hi: SEPARABLE_NOISE,
        });
    }
    let e = e.min(SEPARABLE_NOISE);
    let d = (1.0 - 0.75 * e).sqrt() - (0.75 * e).sqrt();
    Ok(d * d)
}

/// Alice–Eve table for the 4-member POVM: the tetrahedron form with `ε → η(ε)`.
pub fn alice_eve_joint(eps: NoiseParameter) -> Result<JointTable> {
    Ok(tetra_form_table(eta(eps)?, ["alice", "eve"]))
}

/// Extracts η from a tetrahedron-form table via its diagonal.
pub fn eta_from_table(table: &JointTable) -> Result<f64> {
    if table.shape() != [4, 4] {
        return Err(Error::MalformedTable("expected 4x4".into()));
    }
    Ok(4.0 * (0..4).map(|k| table.get(&[k, k])).sum::<Result<f64>>()?)
}

/// Verifies the purification-level contracts; used by the harness to abort
/// on internal inconsistencies.
pub fn check_purification(params: &PurificationParams) -> Result<()> {
    let rho = DensityOperator::from_pure(&purification(params));
    let ab = partial_trace(&rho, &[0, 1])?;
    let target = crate::channel::rho_ab(params.eps());
    let err = ab.max_abs_diff(&target);
    if err > OPERATOR_TOL {
        return Err(Error::Invariant(format!(
            "tr_Eve |S⟩⟨S| deviates from the Werner state by {err:e}"
        )));
    }
    let gram_err = max_abs_diff(&eve_components(params).gram(), &gram_law(params.eps()));
    if gram_err > OPERATOR_TOL {
        return Err(Error::Invariant(format!(
            "ancilla Gram matrix deviates by {gram_err:e}"
        )));
    }
    Ok(())
}
